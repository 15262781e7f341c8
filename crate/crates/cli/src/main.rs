mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use compactfold::enumeration::Breaking;

use crate::config::{set, Config};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "compactfold", version, about = "Fold maximally compact lattice proteins by QUBO annealing and exact enumeration")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "COMPACTFOLD_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the QUBO of one sequence in the text coordinate format.
    BuildQubo(BuildQuboArgs),
    /// Simulated annealing batches over a grid of sweeps per temperature.
    Anneal(AnnealArgs),
    /// Exact enumeration: count, density of states, lowest-K structures.
    Enumerate(EnumerateArgs),
    /// Energy gap against nativeness for a lowest-K list.
    Landscape(LandscapeArgs),
    /// Success rate while varying one Lagrange parameter at a time.
    LambdaSweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// TOML manifest; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice size, e.g. 4x4x3.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<[usize; 3]>,
    /// Sequence file.
    #[arg(long)]
    sequences: Option<PathBuf>,
    /// 1-based index or name within the sequence file.
    #[arg(long)]
    sequence: Option<String>,
    /// Literal one-letter sequence.
    #[arg(long)]
    seq: Option<String>,
    /// Contact matrix file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Use this value for every residue pair instead of a matrix file.
    #[arg(long, allow_hyphen_values = true)]
    uniform_matrix: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    lambda3: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    n_temps: Option<usize>,
    #[arg(long)]
    ratio: Option<f64>,
    /// Sweeps per temperature, comma separated for a grid.
    #[arg(long, value_delimiter = ',')]
    sweeps: Option<Vec<u64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Known minimum contact energy.
    #[arg(long, allow_hyphen_values = true)]
    reference: Option<f64>,
    /// Lowest-K CSV whose first row gives the reference energy.
    #[arg(long)]
    lowest: Option<PathBuf>,
}

#[derive(Args)]
struct BuildQuboArgs {
    #[command(flatten)]
    common: Common,
    /// Model file; defaults to qubo.txt in the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnnealArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Density-of-states CSV for quantile reference lines.
    #[arg(long)]
    dos: Option<PathBuf>,
    /// Skip per-run JSON logs.
    #[arg(long)]
    no_logs: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    common: Common,
    /// rules, canonical or auto.
    #[arg(long, value_parser = parse_breaking)]
    breaking: Option<Breaking>,
    #[arg(long)]
    seed_len: Option<usize>,
    #[arg(long)]
    chunk_seeds: Option<usize>,
    #[arg(long)]
    lowest_k: Option<usize>,
    /// Binary archive of every structure.
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Seconds between checkpoint writes.
    #[arg(long)]
    checkpoint_interval: Option<f64>,
    /// Continue from the checkpoint file if present.
    #[arg(long)]
    resume: bool,
    /// Stop cleanly after this many seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct LandscapeArgs {
    #[command(flatten)]
    common: Common,
    /// Lowest-K CSV written by `enumerate`.
    #[arg(long)]
    lowest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Parameters to vary (1, 2, 3), comma separated.
    #[arg(long, value_delimiter = ',')]
    axes: Option<Vec<usize>>,
    /// Offsets from the centre point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    deltas: Option<Vec<f64>>,
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(['x', 'X', ',']).collect();
    match parts.as_slice() {
        [a, b, c] => {
            let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad size {t:?}"));
            Ok([p(a)?, p(b)?, p(c)?])
        }
        _ => Err(format!("expected three sizes like 4x4x3, got {s:?}")),
    }
}

fn parse_breaking(s: &str) -> Result<Breaking, String> {
    match s {
        "rules" => Ok(Breaking::Rules),
        "canonical" => Ok(Breaking::Canonical),
        "auto" => Ok(Breaking::Auto),
        _ => Err(format!("expected rules, canonical or auto, got {s:?}")),
    }
}

fn load(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let p = &mut cfg.problem;
    set(&mut p.dims, common.dims);
    set(&mut p.sequences, common.sequences.clone());
    set(&mut p.sequence, common.sequence.clone());
    set(&mut p.seq, common.seq.clone());
    set(&mut p.matrix, common.matrix.clone());
    set(&mut p.uniform_matrix, common.uniform_matrix);
    set(&mut cfg.lambda.lambda1, common.lambda1);
    set(&mut cfg.lambda.lambda2, common.lambda2);
    set(&mut cfg.lambda.lambda3, common.lambda3);
    set(&mut cfg.output.dir, common.out.clone());
    Ok(cfg)
}

fn apply_schedule(cfg: &mut Config, s: ScheduleArgs) {
    set(&mut cfg.schedule.n_temps, s.n_temps);
    set(&mut cfg.schedule.ratio, s.ratio);
    set(&mut cfg.schedule.sweeps, s.sweeps);
    set(&mut cfg.anneal.runs, s.runs);
    set(&mut cfg.anneal.base_seed, s.base_seed);
    set(&mut cfg.anneal.reference, s.reference);
    set(&mut cfg.anneal.lowest, s.lowest);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let workers = cli.workers.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;

    match cli.command {
        Command::BuildQubo(a) => {
            let cfg = load(&a.common)?;
            commands::build_qubo(&cfg, a.output)
        }
        Command::Anneal(a) => {
            let mut cfg = load(&a.common)?;
            apply_schedule(&mut cfg, a.schedule);
            set(&mut cfg.anneal.dos, a.dos);
            if a.no_logs {
                cfg.anneal.logs = Some(false);
            }
            commands::anneal(&cfg)
        }
        Command::Enumerate(a) => {
            let mut cfg = load(&a.common)?;
            let e = &mut cfg.enumerate;
            set(&mut e.breaking, a.breaking);
            set(&mut e.seed_len, a.seed_len);
            set(&mut e.chunk_seeds, a.chunk_seeds);
            set(&mut e.lowest_k, a.lowest_k);
            set(&mut e.archive, a.archive);
            set(&mut e.checkpoint, a.checkpoint);
            set(&mut e.checkpoint_interval, a.checkpoint_interval);
            set(&mut e.time_limit, a.time_limit);
            if a.resume {
                e.resume = Some(true);
            }
            commands::enumerate(&cfg, workers)
        }
        Command::Landscape(a) => {
            let mut cfg = load(&a.common)?;
            set(&mut cfg.landscape.lowest, a.lowest);
            commands::landscape(&cfg)
        }
        Command::LambdaSweep(a) => {
            let mut cfg = load(&a.common)?;
            apply_schedule(&mut cfg, a.schedule);
            set(&mut cfg.sweep.axes, a.axes);
            set(&mut cfg.sweep.deltas, a.deltas);
            commands::lambda_sweep(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("compactfold: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
