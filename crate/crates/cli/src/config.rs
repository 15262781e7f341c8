//! Experiment manifest: a TOML file with one section per concern. Command
//! line flags are merged on top.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use compactfold::enumeration::Breaking;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub problem: Problem,
    #[serde(default)]
    pub lambda: Lambda,
    #[serde(default)]
    pub schedule: ScheduleCfg,
    #[serde(default)]
    pub anneal: AnnealCfg,
    #[serde(default)]
    pub enumerate: EnumerateCfg,
    #[serde(default)]
    pub sweep: SweepCfg,
    #[serde(default)]
    pub landscape: LandscapeCfg,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub dims: Option<[usize; 3]>,
    /// Sequence file with one sequence per line, optional `>name` headers.
    pub sequences: Option<PathBuf>,
    /// 1-based index or header name within `sequences`.
    pub sequence: Option<String>,
    /// Literal sequence; takes precedence over `sequences`.
    pub seq: Option<String>,
    pub matrix: Option<PathBuf>,
    /// Same contact value for every pair, instead of a matrix file.
    pub uniform_matrix: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambda {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleCfg {
    pub n_temps: Option<usize>,
    pub ratio: Option<f64>,
    /// Sweeps per temperature; one batch per entry.
    pub sweeps: Option<Vec<u64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealCfg {
    pub runs: Option<usize>,
    pub base_seed: Option<u64>,
    /// Known minimum contact energy used to judge success.
    pub reference: Option<f64>,
    /// Density-of-states CSV for quantile reference lines.
    pub dos: Option<PathBuf>,
    /// Lowest-K CSV; its first row supplies the reference energy.
    pub lowest: Option<PathBuf>,
    pub logs: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateCfg {
    pub breaking: Option<Breaking>,
    pub seed_len: Option<usize>,
    pub chunk_seeds: Option<usize>,
    pub lowest_k: Option<usize>,
    pub archive: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_interval: Option<f64>,
    pub resume: Option<bool>,
    pub time_limit: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    /// Which of lambda1..3 to vary, 1-based.
    pub axes: Option<Vec<usize>>,
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeCfg {
    pub lowest: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

impl Config {
    /// Reads a manifest; relative paths inside it are taken relative to the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Config = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.problem.sequences,
            &mut cfg.problem.matrix,
            &mut cfg.anneal.dos,
            &mut cfg.anneal.lowest,
            &mut cfg.enumerate.archive,
            &mut cfg.enumerate.checkpoint,
            &mut cfg.landscape.lowest,
            &mut cfg.output.dir,
        ] {
            if let Some(rel) = p.as_mut().filter(|p| p.is_relative()) {
                *rel = base.join(&*rel);
            }
        }
        Ok(cfg)
    }
}

/// Replaces `slot` when the flag was given.
pub fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}
