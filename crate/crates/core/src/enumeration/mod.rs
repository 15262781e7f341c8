//! Exact enumeration of maximally compact structures, one per symmetry
//! class, with streaming observables, checkpointing and a binary archive.

mod archive;
mod observables;
mod run;
mod sample;
mod search;
mod symmetry;

use std::path::PathBuf;

use thiserror::Error;

pub use archive::{read_archive, ArchiveError, ArchiveHeader, ArchiveWriter, PathArchive};
pub use observables::{
    energy_key, key_energy, DensityOfStates, EnergyScorer, LowEntry, LowestK, ENERGY_RESOLUTION,
};
pub use run::{
    enumerate_all, enumerate_observables, CheckpointOptions, EnumerationOptions,
    EnumerationSummary, ObservableSpec, Observables,
};
pub use sample::random_hamiltonian_path;
pub use search::{rules_supported, starting_points, Breaking, Enumerator, PartialPath, StartPoint};
pub use symmetry::SymmetryGroup;

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error("direction rules need Lx = Ly even, Lz odd and Lz != Lx; got {0:?}")]
    UnsupportedDims([usize; 3]),
    #[error("seed length {seed_len} must be between 1 and {sites}")]
    SeedLength { seed_len: usize, sites: usize },
    #[error("chain of {chain} residues cannot fill {sites} sites")]
    NotCompact { chain: usize, sites: usize },
    #[error("density of states is empty")]
    EmptyDensity,
    #[error("quantile q must exceed 1, got {0}")]
    BadQuantile(f64),
    #[error("interrupted after {completed} of {total} seeds{}", checkpoint.as_ref().map(|p| format!(" (checkpoint {})", p.display())).unwrap_or_default())]
    Interrupted {
        completed: usize,
        total: usize,
        checkpoint: Option<PathBuf>,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

#[cfg(test)]
mod tests;
