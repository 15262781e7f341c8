use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kernel::{rng_for, random_state_with, ChainState, Kernel, DRIFT_TOLERANCE};
use super::schedule::Schedule;
use crate::lattice::Lattice;
use crate::qubo::{decode, BitState, QuboModel, TermEnergies};

/// Tolerance on E_MJ when judging a run successful.
pub const SUCCESS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnealError {
    #[error("a batch needs at least one run")]
    NoRuns,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Compare the cached energy with a full evaluation after every sweep.
    pub verify_every_sweep: bool,
}

/// State at the end of one temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub beta: f64,
    pub energy: f64,
    /// Unweighted terms; absent for models without a stored decomposition.
    pub terms: Option<TermEnergies>,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub final_energy: f64,
    pub final_terms: Option<TermEnergies>,
    pub final_bits: BitState,
    pub best_energy: f64,
    pub best_bits: BitState,
    pub trace: Vec<TraceEntry>,
    pub seconds: f64,
    /// Largest correction applied when re-synchronising the cache.
    pub max_drift: f64,
}

impl RunResult {
    /// Zero penalties and E_MJ within [`SUCCESS_TOLERANCE`] of `reference`.
    pub fn is_success(&self, reference: f64) -> bool {
        self.final_terms
            .is_some_and(|t| t.penalties_zero() && (t.e_mj - reference).abs() <= SUCCESS_TOLERANCE)
    }
}

fn terms_of(model: &QuboModel, bits: &[u8]) -> Option<TermEnergies> {
    model.term_values(bits).map(TermEnergies::from_array)
}

/// Anneals from a random initial state drawn from `seed`.
pub fn anneal(model: &QuboModel, schedule: &Schedule, seed: u64) -> RunResult {
    anneal_with(model, schedule, seed, RunOptions::default())
}

pub fn anneal_with(model: &QuboModel, schedule: &Schedule, seed: u64, opts: RunOptions) -> RunResult {
    let start = Instant::now();
    let mut rng = rng_for(seed);
    let kernel = Kernel::new(model);
    let init = random_state_with(model.n_bits(), &mut rng);
    let mut state = kernel.state(&init);
    let mut best = Best::new(&state);
    let mut max_drift: f64 = 0.0;
    let mut trace = Vec::with_capacity(schedule.betas().len());
    let attempts = schedule.sweeps_per_temp() * model.n_bits() as u64;

    for &beta in schedule.betas() {
        let mut accepted = 0;
        for _ in 0..schedule.sweeps_per_temp() {
            accepted += kernel.sweep_watch(&mut state, beta, &mut rng, &mut |s| best.offer(s));
            if opts.verify_every_sweep {
                assert!(kernel.consistent(&state), "cached energy drifted");
            }
        }
        let drift = kernel.resync(&mut state);
        debug_assert!(drift <= DRIFT_TOLERANCE * state.energy().abs().max(1.0));
        max_drift = max_drift.max(drift);
        best.offer(&state);
        trace.push(TraceEntry {
            beta,
            energy: state.energy(),
            terms: terms_of(model, state.bits()),
            acceptance_rate: if attempts == 0 { 0.0 } else { accepted as f64 / attempts as f64 },
        });
    }
    best.offer(&state);

    RunResult {
        seed,
        final_energy: state.energy(),
        final_terms: terms_of(model, state.bits()),
        final_bits: state.to_bit_state(),
        best_energy: best.energy,
        best_bits: BitState::from_bits(best.bits),
        trace,
        seconds: start.elapsed().as_secs_f64(),
        max_drift,
    }
}

struct Best {
    energy: f64,
    bits: Vec<u8>,
}

impl Best {
    fn new(s: &ChainState) -> Self {
        Self {
            energy: s.energy(),
            bits: s.bits().to_vec(),
        }
    }

    fn offer(&mut self, s: &ChainState) {
        if s.energy() < self.energy {
            self.energy = s.energy();
            self.bits.copy_from_slice(s.bits());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub runs: usize,
    pub mean_final_energy: f64,
    /// Mean unweighted terms of the final states, when available.
    pub mean_terms: Option<TermEnergies>,
    pub reference: Option<f64>,
    pub successes: Option<usize>,
    pub success_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub stats: BatchStats,
    pub runs: Vec<RunResult>,
}

/// Independent runs with seeds `base_seed + r`, executed on the current
/// rayon pool and aggregated in run order.
pub fn run_batch(
    model: &QuboModel,
    schedule: &Schedule,
    n_runs: usize,
    base_seed: u64,
    reference: Option<f64>,
) -> Result<Batch, AnnealError> {
    if n_runs == 0 {
        return Err(AnnealError::NoRuns);
    }
    let runs: Vec<RunResult> = (0..n_runs as u64)
        .into_par_iter()
        .map(|r| anneal(model, schedule, base_seed.wrapping_add(r)))
        .collect();
    let stats = summarize(&runs, reference);
    Ok(Batch { stats, runs })
}

pub fn summarize(runs: &[RunResult], reference: Option<f64>) -> BatchStats {
    let n = runs.len() as f64;
    let mean_final_energy = runs.iter().map(|r| r.final_energy).sum::<f64>() / n;
    let mean_terms = runs
        .iter()
        .map(|r| r.final_terms)
        .collect::<Option<Vec<_>>>()
        .map(|ts| {
            let mut m = TermEnergies::default();
            for t in &ts {
                m.e_mj += t.e_mj / n;
                m.e1 += t.e1 / n;
                m.e2 += t.e2 / n;
                m.e3 += t.e3 / n;
            }
            m
        });
    let successes = reference.map(|e| runs.iter().filter(|r| r.is_success(e)).count());
    BatchStats {
        runs: runs.len(),
        mean_final_energy,
        mean_terms,
        reference,
        successes,
        success_rate: successes.map(|s| s as f64 / n),
    }
}

/// Per-run JSON log document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub schedule: Schedule,
    pub trace: Vec<TraceEntry>,
    pub final_energy: f64,
    pub final_terms: Option<TermEnergies>,
    pub best_energy: f64,
    pub success: Option<bool>,
    pub seconds: f64,
    /// Site of each residue when the final bits decode to a valid chain.
    pub conformation: Option<Vec<usize>>,
}

impl RunLog {
    pub fn new(
        run: &RunResult,
        schedule: &Schedule,
        lattice: Option<&Lattice>,
        reference: Option<f64>,
    ) -> Self {
        Self {
            seed: run.seed,
            schedule: schedule.clone(),
            trace: run.trace.clone(),
            final_energy: run.final_energy,
            final_terms: run.final_terms,
            best_energy: run.best_energy,
            success: reference.map(|e| run.is_success(e)),
            seconds: run.seconds,
            conformation: lattice
                .and_then(|l| decode(&run.final_bits, l).ok())
                .map(|c| c.path().to_vec()),
        }
    }
}

/// `run,seed,E_f,E_MJ,E1,E2,E3,success,seconds`; unknown fields are empty.
pub fn write_summary_csv(mut w: impl Write, runs: &[RunResult], reference: Option<f64>) -> io::Result<()> {
    writeln!(w, "run,seed,E_f,E_MJ,E1,E2,E3,success,seconds")?;
    for (r, run) in runs.iter().enumerate() {
        let terms = match run.final_terms {
            Some(t) => format!("{},{},{},{}", t.e_mj, t.e1, t.e2, t.e3),
            None => ",,,".to_string(),
        };
        let success = reference.map_or(String::new(), |e| (run.is_success(e) as u8).to_string());
        writeln!(
            w,
            "{r},{},{},{terms},{success},{:.6}",
            run.seed, run.final_energy, run.seconds
        )?;
    }
    Ok(())
}
