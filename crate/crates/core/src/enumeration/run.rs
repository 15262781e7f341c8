//! Parallel, resumable enumeration over seed paths.

use std::fs;
use std::io::{Seek, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::ArchiveWriter;
use super::observables::{DensityOfStates, EnergyScorer, LowestK};
use super::search::{Breaking, Enumerator, PartialPath};
use super::EnumerationError;
use crate::lattice::Lattice;

#[derive(Debug, Clone)]
pub struct CheckpointOptions {
    pub path: PathBuf,
    pub interval: Duration,
    /// Continue from `path` if it exists.
    pub resume: bool,
}

#[derive(Debug, Clone)]
pub struct EnumerationOptions {
    pub breaking: Breaking,
    /// Seed path length; `None` picks the shortest giving 32 seeds per
    /// worker.
    pub seed_len: Option<usize>,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    /// Seeds processed per parallel batch between checkpoints.
    pub chunk_seeds: usize,
    pub checkpoint: Option<CheckpointOptions>,
    pub time_limit: Option<Duration>,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            breaking: Breaking::Auto,
            seed_len: None,
            threads: 0,
            chunk_seeds: 1024,
            checkpoint: None,
            time_limit: None,
        }
    }
}

/// What to accumulate besides the structure count.
#[derive(Debug, Clone, Copy, Default)]
pub struct ObservableSpec<'a> {
    pub scorer: Option<&'a EnergyScorer>,
    pub dos: bool,
    pub lowest_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub count: u64,
    pub dos: Option<DensityOfStates>,
    pub lowest: Option<LowestK>,
}

impl Observables {
    pub fn new(spec: &ObservableSpec) -> Self {
        let scored = spec.scorer.is_some();
        Self {
            count: 0,
            dos: (scored && spec.dos).then(DensityOfStates::default),
            lowest: spec.lowest_k.filter(|_| scored).map(LowestK::new),
        }
    }

    #[inline]
    pub fn visit(&mut self, path: &[u8], scorer: Option<&EnergyScorer>) {
        self.count += 1;
        if let Some(scorer) = scorer {
            let e = scorer.score(path);
            if let Some(dos) = &mut self.dos {
                dos.add(e);
            }
            if let Some(low) = &mut self.lowest {
                low.offer(e, path);
            }
        }
    }

    pub fn merge(&mut self, other: Observables) {
        self.count += other.count;
        if let (Some(a), Some(b)) = (&mut self.dos, &other.dos) {
            a.merge(b);
        }
        if let (Some(a), Some(b)) = (&mut self.lowest, other.lowest) {
            a.merge(b);
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationSummary {
    pub observables: Observables,
    pub n_seeds: usize,
    pub seed_len: usize,
    /// Seeds skipped because a checkpoint had already completed them.
    pub resumed_seeds: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    dims: [usize; 3],
    rules: bool,
    seed_len: usize,
    n_seeds: usize,
    /// Bitmap over seed indices, 64 per word.
    completed: Vec<u64>,
    observables: Observables,
}

/// Enumerates every maximally compact structure of `lattice` once per
/// symmetry class, accumulating the requested observables. Results do not
/// depend on thread count, seed length or chunking. With an archive, records
/// are written seed by seed in depth-first order.
pub fn enumerate_all<W: Write + Seek>(
    lattice: &Lattice,
    opts: &EnumerationOptions,
    spec: ObservableSpec,
    mut archive: Option<&mut ArchiveWriter<W>>,
) -> Result<EnumerationSummary, EnumerationError> {
    let start = Instant::now();
    if let Some(scorer) = spec.scorer {
        if scorer.chain_length() != lattice.site_count() {
            return Err(EnumerationError::NotCompact {
                chain: scorer.chain_length(),
                sites: lattice.site_count(),
            });
        }
    }
    if archive.is_some() && opts.checkpoint.as_ref().is_some_and(|c| c.resume) {
        return Err(EnumerationError::Checkpoint(
            "an archive cannot be appended to a resumed run".into(),
        ));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| EnumerationError::Checkpoint(format!("thread pool: {e}")))?;
    let enumerator = Enumerator::new(lattice, opts.breaking)?;
    let seeds = match opts.seed_len {
        Some(len) => enumerator.seeds(len)?,
        None => enumerator.auto_seeds(32 * pool.current_num_threads()),
    };
    let seed_len = seeds.first().map_or(0, PartialPath::len);
    let n_seeds = seeds.len();

    let mut completed = vec![0u64; n_seeds.div_ceil(64)];
    let mut observables = Observables::new(&spec);
    let mut resumed_seeds = 0;
    if let Some(cp) = opts.checkpoint.as_ref().filter(|c| c.resume && c.path.exists()) {
        let saved = load_checkpoint(&cp.path)?;
        if saved.dims != lattice.dims()
            || saved.rules != enumerator.uses_rules()
            || saved.seed_len != seed_len
            || saved.n_seeds != n_seeds
        {
            return Err(EnumerationError::Checkpoint(format!(
                "{} was written for a different lattice or seeding",
                cp.path.display()
            )));
        }
        if Observables::new(&spec).dos.is_some() != saved.observables.dos.is_some()
            || Observables::new(&spec).lowest.as_ref().map(LowestK::k)
                != saved.observables.lowest.as_ref().map(LowestK::k)
        {
            return Err(EnumerationError::Checkpoint(format!(
                "{} tracks different observables",
                cp.path.display()
            )));
        }
        completed = saved.completed;
        observables = saved.observables;
        resumed_seeds = completed.iter().map(|w| w.count_ones() as usize).sum();
    }

    let is_done = |completed: &[u64], i: usize| completed[i / 64] >> (i % 64) & 1 == 1;
    let todo: Vec<usize> = (0..n_seeds).filter(|&i| !is_done(&completed, i)).collect();
    let want_archive = archive.is_some();
    let mut last_checkpoint = Instant::now();

    for chunk in todo.chunks(opts.chunk_seeds.max(1)) {
        if opts.time_limit.is_some_and(|t| start.elapsed() >= t) {
            let checkpoint = match &opts.checkpoint {
                Some(cp) => {
                    save_checkpoint(&cp.path, lattice, &enumerator, seed_len, n_seeds, &completed, &observables)?;
                    Some(cp.path.clone())
                }
                None => None,
            };
            return Err(EnumerationError::Interrupted {
                completed: completed.iter().map(|w| w.count_ones() as usize).sum(),
                total: n_seeds,
                checkpoint,
            });
        }

        let results: Vec<(Observables, Vec<u8>)> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&i| {
                    let mut obs = Observables::new(&spec);
                    let mut records = Vec::new();
                    enumerator.extend_all(&seeds[i], &mut |path| {
                        obs.visit(path, spec.scorer);
                        if want_archive {
                            records.extend_from_slice(path);
                        }
                    });
                    (obs, records)
                })
                .collect()
        });
        for (obs, records) in results {
            observables.merge(obs);
            if let Some(w) = archive.as_deref_mut() {
                w.write_records(&records)?;
            }
        }
        for &i in chunk {
            completed[i / 64] |= 1 << (i % 64);
        }

        if let Some(cp) = &opts.checkpoint {
            if last_checkpoint.elapsed() >= cp.interval {
                save_checkpoint(&cp.path, lattice, &enumerator, seed_len, n_seeds, &completed, &observables)?;
                last_checkpoint = Instant::now();
            }
        }
    }

    if let Some(cp) = &opts.checkpoint {
        save_checkpoint(&cp.path, lattice, &enumerator, seed_len, n_seeds, &completed, &observables)?;
    }

    Ok(EnumerationSummary {
        observables,
        n_seeds,
        seed_len,
        resumed_seeds,
        wall_time: start.elapsed(),
    })
}

/// Convenience wrapper without an archive.
pub fn enumerate_observables(
    lattice: &Lattice,
    opts: &EnumerationOptions,
    spec: ObservableSpec,
) -> Result<EnumerationSummary, EnumerationError> {
    enumerate_all::<std::io::Cursor<Vec<u8>>>(lattice, opts, spec, None)
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint, EnumerationError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| EnumerationError::Checkpoint(format!("{}: {e}", path.display())))
}

fn save_checkpoint(
    path: &Path,
    lattice: &Lattice,
    enumerator: &Enumerator,
    seed_len: usize,
    n_seeds: usize,
    completed: &[u64],
    observables: &Observables,
) -> Result<(), EnumerationError> {
    let cp = Checkpoint {
        dims: lattice.dims(),
        rules: enumerator.uses_rules(),
        seed_len,
        n_seeds,
        completed: completed.to_vec(),
        observables: observables.clone(),
    };
    let text = serde_json::to_string(&cp)
        .map_err(|e| EnumerationError::Checkpoint(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
