use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = tmp_path(path);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::runtime(format!("writing {}: {e}", path.display())));
    }
    fs::rename(&tmp, path)
        .map_err(|e| CliError::runtime(format!("renaming into {}: {e}", path.display())))
}

pub fn write_string(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

/// Temporary file for outputs that need seeking; call [`commit`] once
/// complete.
pub fn staged(path: &Path) -> Result<(File, PathBuf), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = tmp_path(path);
    let file = File::create(&tmp)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", tmp.display())))?;
    Ok((file, tmp))
}

pub fn commit(tmp: &Path, path: &Path) -> Result<(), CliError> {
    fs::rename(tmp, path)
        .map_err(|e| CliError::runtime(format!("renaming into {}: {e}", path.display())))
}

/// Fixed six-decimal rendering, matching the energy bin width.
pub fn energy(e: f64) -> String {
    let s = format!("{e:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}
