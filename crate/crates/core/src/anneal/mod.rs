//! Simulated annealing on a QUBO: geometric inverse-temperature ladder,
//! Metropolis single-bit flips and seeded batches.

mod kernel;
mod run;
mod schedule;

pub use kernel::{random_state, random_state_with, rng_for, AnnealRng, ChainState, Kernel, DRIFT_TOLERANCE};
pub use run::{
    anneal, anneal_with, run_batch, summarize, write_summary_csv, AnnealError, Batch, BatchStats,
    RunLog, RunOptions, RunResult, TraceEntry, SUCCESS_TOLERANCE,
};
pub use schedule::{make_schedule, Schedule, ScheduleError};
