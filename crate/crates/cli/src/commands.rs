use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use compactfold::anneal::{make_schedule, run_batch, write_summary_csv, Batch, RunLog, Schedule};
use compactfold::enumeration::{
    energy_key, enumerate_all, key_energy, ArchiveWriter, Breaking, CheckpointOptions,
    DensityOfStates, EnergyScorer, EnumerationError, EnumerationOptions, ObservableSpec,
};
use compactfold::qubo::{build_qubo as build_model, export_qubo, LagrangeParams, QuboModel};
use compactfold::{parse_sequence_file, Conformation, ContactMatrix, Lattice, Sequence};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{commit, energy, staged, write_atomic, write_string};

const DEFAULT_DIMS: [usize; 3] = [4, 4, 3];
const QUANTILES: [f64; 3] = [2.0, 100.0, 1e8];

fn lattice(cfg: &Config) -> Result<Lattice, CliError> {
    Lattice::new(cfg.problem.dims.unwrap_or(DEFAULT_DIMS)).map_err(|e| CliError::usage(e.to_string()))
}

fn out_dir(cfg: &Config) -> PathBuf {
    cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn sequence(cfg: &Config) -> Result<Option<(String, Sequence)>, CliError> {
    let p = &cfg.problem;
    if let Some(s) = &p.seq {
        let seq = s.parse().map_err(|e| CliError::usage(format!("sequence: {e}")))?;
        return Ok(Some(("seq".into(), seq)));
    }
    let Some(path) = &p.sequences else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read sequence file {}: {e}", path.display())))?;
    let all = parse_sequence_file(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let pick = match (&p.sequence, all.len()) {
        (None, 1) => 0,
        (None, n) => {
            return Err(CliError::usage(format!(
                "{} holds {n} sequences; choose one with --sequence",
                path.display()
            )))
        }
        (Some(sel), n) => match sel.parse::<usize>() {
            Ok(i) if (1..=n).contains(&i) => i - 1,
            Ok(i) => return Err(CliError::usage(format!("sequence index {i} outside 1..={n}"))),
            Err(_) => all
                .iter()
                .position(|s| s.name.as_deref() == Some(sel.as_str()))
                .ok_or_else(|| CliError::usage(format!("no sequence named {sel:?}")))?,
        },
    };
    let chosen = &all[pick];
    let label = chosen.name.clone().unwrap_or_else(|| format!("{}", pick + 1));
    Ok(Some((label, chosen.sequence.clone())))
}

fn require_sequence(cfg: &Config) -> Result<(String, Sequence), CliError> {
    sequence(cfg)?.ok_or_else(|| CliError::usage("no sequence given (use --seq or --sequences)"))
}

fn matrix(cfg: &Config) -> Result<Option<ContactMatrix>, CliError> {
    let p = &cfg.problem;
    match (&p.matrix, p.uniform_matrix) {
        (Some(_), Some(_)) => Err(CliError::usage("give either a matrix file or a uniform value, not both")),
        (None, Some(v)) if v.is_finite() => Ok(Some(ContactMatrix::uniform(v))),
        (None, Some(v)) => Err(CliError::usage(format!("uniform matrix value must be finite, got {v}"))),
        (None, None) => Ok(None),
        (Some(path), None) => {
            let file = File::open(path)
                .map_err(|e| CliError::usage(format!("cannot open matrix file {}: {e}", path.display())))?;
            ContactMatrix::load(BufReader::new(file))
                .map(Some)
                .map_err(|e| CliError::usage(format!("matrix file {}: {e}", path.display())))
        }
    }
}

fn require_matrix(cfg: &Config) -> Result<ContactMatrix, CliError> {
    matrix(cfg)?.ok_or_else(|| CliError::usage("no contact matrix given (use --matrix or --uniform-matrix)"))
}

fn lambda(cfg: &Config) -> Result<LagrangeParams, CliError> {
    let d = LagrangeParams::default();
    let l = &cfg.lambda;
    LagrangeParams::new(
        l.lambda1.unwrap_or(d.lambda1),
        l.lambda2.unwrap_or(d.lambda2),
        l.lambda3.unwrap_or(d.lambda3),
    )
    .map_err(|e| CliError::usage(e.to_string()))
}

fn schedules(cfg: &Config) -> Result<Vec<Schedule>, CliError> {
    let s = &cfg.schedule;
    let sweeps = s.sweeps.clone().unwrap_or_else(|| vec![10_000]);
    if sweeps.is_empty() {
        return Err(CliError::usage("empty sweeps grid"));
    }
    sweeps
        .into_iter()
        .map(|n| {
            make_schedule(s.n_temps.unwrap_or(25), s.ratio.unwrap_or(1.05), n)
                .map_err(|e| CliError::usage(format!("schedule: {e}")))
        })
        .collect()
}

fn runs(cfg: &Config) -> Result<usize, CliError> {
    match cfg.anneal.runs.unwrap_or(100) {
        0 => Err(CliError::usage("the number of runs must be at least 1")),
        n => Ok(n),
    }
}

fn problem_model(cfg: &Config) -> Result<(Lattice, String, Sequence, QuboModel), CliError> {
    let l = lattice(cfg)?;
    let (label, seq) = require_sequence(cfg)?;
    let m = require_matrix(cfg)?;
    let model = build_model(&seq, &l, &m, lambda(cfg)?).map_err(|e| CliError::usage(e.to_string()))?;
    Ok((l, label, seq, model))
}

pub fn build_qubo(cfg: &Config, output: Option<PathBuf>) -> Result<(), CliError> {
    let (_, label, _, model) = problem_model(cfg)?;
    let path = output.unwrap_or_else(|| out_dir(cfg).join("qubo.txt"));
    write_atomic(&path, |w| export_qubo(&model, w))?;
    let linear = model.linear().iter().filter(|&&c| c != 0.0).count();
    println!(
        "sequence {label}: n_bits {} linear_nonzero {linear} quadratic_nonzero {} -> {}",
        model.n_bits(),
        model.quadratic().len(),
        path.display()
    );
    Ok(())
}

/// One row of a lowest-K CSV.
struct LowRow {
    energy: f64,
    path: Vec<u8>,
}

fn read_lowest(path: &Path) -> Result<Vec<LowRow>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read lowest-K file {}: {e}", path.display())))?;
    let bad = |n: usize, what: &str| CliError::usage(format!("{}:{n}: {what}", path.display()));
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad(idx + 1, "expected rank,energy,Q,path_hex"));
        }
        let energy = cols[1].parse().map_err(|_| bad(idx + 1, "bad energy"))?;
        let path = hex::decode(cols[3].trim()).map_err(|_| bad(idx + 1, "bad path_hex"))?;
        rows.push(LowRow { energy, path });
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!("{} has no structures", path.display())));
    }
    Ok(rows)
}

fn read_dos(path: &Path) -> Result<DensityOfStates, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read density file {}: {e}", path.display())))?;
    let mut dos = DensityOfStates::default();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = line
            .split_once(',')
            .and_then(|(e, c)| Some((e.parse::<f64>().ok()?, c.trim().parse::<u64>().ok()?)));
        let (e, c) = parsed.ok_or_else(|| {
            CliError::usage(format!("{}:{}: expected energy,count", path.display(), idx + 1))
        })?;
        dos.add_count(energy_key(e), c);
    }
    if dos.is_empty() {
        return Err(CliError::usage(format!("{} is empty", path.display())));
    }
    Ok(dos)
}

fn reference_lines(dos: &DensityOfStates) -> Result<String, CliError> {
    let mut s = String::from("label,q,energy\n");
    let min = dos.min_energy().expect("non-empty");
    writeln!(s, "minimum,,{}", energy(min)).unwrap();
    for q in QUANTILES {
        let e = dos.quantile(q).map_err(|e| CliError::runtime(e.to_string()))?;
        writeln!(s, "quantile,{q},{}", energy(e)).unwrap();
    }
    Ok(s)
}

/// Explicit value, else rank 1 of a lowest-K file, else the minimum of a
/// density of states.
fn reference(cfg: &Config, dos: Option<&DensityOfStates>) -> Result<Option<f64>, CliError> {
    if let Some(r) = cfg.anneal.reference {
        return Ok(Some(r));
    }
    if let Some(p) = &cfg.anneal.lowest {
        return Ok(Some(read_lowest(p)?[0].energy));
    }
    Ok(dos.and_then(DensityOfStates::min_energy))
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

pub fn anneal(cfg: &Config) -> Result<(), CliError> {
    let (l, label, _, model) = problem_model(cfg)?;
    let schedules = schedules(cfg)?;
    let n_runs = runs(cfg)?;
    let base_seed = cfg.anneal.base_seed.unwrap_or(0);
    let dos = cfg.anneal.dos.as_deref().map(read_dos).transpose()?;
    let reference = reference(cfg, dos.as_ref())?;
    let out = out_dir(cfg);
    let logs = cfg.anneal.logs.unwrap_or(true);

    if let Some(dos) = &dos {
        write_string(&out.join("reference_lines.csv"), &reference_lines(dos)?)?;
    }

    let mut summary = String::from("sweeps,runs,mean_E_f,success_rate,mean_E_MJ,mean_E1,mean_E2,mean_E3\n");
    for schedule in &schedules {
        let sweeps = schedule.sweeps_per_temp();
        let Batch { stats, runs } = run_batch(&model, schedule, n_runs, base_seed, reference)
            .map_err(|e| CliError::usage(e.to_string()))?;
        write_atomic(&out.join(format!("runs_s{sweeps}.csv")), |w| {
            write_summary_csv(w, &runs, reference)
        })?;
        if logs {
            for (r, run) in runs.iter().enumerate() {
                let log = RunLog::new(run, schedule, Some(&l), reference);
                let text = serde_json::to_string_pretty(&log).map_err(|e| CliError::runtime(e.to_string()))?;
                write_string(&out.join(format!("logs/s{sweeps}/run{r:03}.json")), &text)?;
            }
        }
        let t = stats.mean_terms.unwrap_or_default();
        writeln!(
            summary,
            "{sweeps},{},{},{},{},{},{},{}",
            stats.runs,
            stats.mean_final_energy,
            opt(stats.success_rate),
            t.e_mj,
            t.e1,
            t.e2,
            t.e3
        )
        .unwrap();
        write_string(&out.join("anneal.csv"), &summary)?;
        println!(
            "sequence {label} sweeps {sweeps}: mean E_f {:.4} success {}",
            stats.mean_final_energy,
            stats.success_rate.map_or("n/a".into(), |s| format!("{s:.3}"))
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct EnumerationReport {
    dims: [usize; 3],
    structures: u64,
    rules: bool,
    seed_len: usize,
    seeds: usize,
    sequence: Option<String>,
    minimum_energy: Option<f64>,
    quantiles: Vec<(f64, f64)>,
}

fn enumeration_error(e: EnumerationError) -> CliError {
    match e {
        EnumerationError::UnsupportedDims(_)
        | EnumerationError::SeedLength { .. }
        | EnumerationError::NotCompact { .. } => CliError::usage(e.to_string()),
        EnumerationError::Checkpoint(ref m) if m.contains("archive") => CliError::usage(e.to_string()),
        other => CliError::runtime(other.to_string()),
    }
}

fn seconds(name: &str, v: Option<f64>, default: f64) -> Result<Duration, CliError> {
    let v = v.unwrap_or(default);
    Duration::try_from_secs_f64(v).map_err(|_| CliError::usage(format!("{name} must be a non-negative number of seconds")))
}

pub fn enumerate(cfg: &Config, workers: usize) -> Result<(), CliError> {
    let l = lattice(cfg)?;
    let e = &cfg.enumerate;
    let seq = sequence(cfg)?;
    let m = matrix(cfg)?;
    let scorer = match (&seq, &m) {
        (Some((_, s)), Some(m)) => Some(EnergyScorer::new(&l, s, m)),
        (Some(_), None) => return Err(CliError::usage("energies need a contact matrix")),
        _ => None,
    };
    let resume = e.resume.unwrap_or(false);
    if e.archive.is_some() && resume {
        return Err(CliError::usage("--archive cannot be combined with --resume"));
    }
    let lowest_k = e.lowest_k.unwrap_or(100);
    if lowest_k == 0 {
        return Err(CliError::usage("lowest_k must be at least 1"));
    }
    let opts = EnumerationOptions {
        breaking: e.breaking.unwrap_or(Breaking::Auto),
        seed_len: e.seed_len,
        threads: workers,
        chunk_seeds: e.chunk_seeds.unwrap_or(1024),
        checkpoint: match &e.checkpoint {
            Some(path) => Some(CheckpointOptions {
                path: path.clone(),
                interval: seconds("checkpoint_interval", e.checkpoint_interval, 300.0)?,
                resume,
            }),
            None if resume => return Err(CliError::usage("--resume needs a checkpoint file")),
            None => None,
        },
        time_limit: e.time_limit.map(|t| seconds("time_limit", Some(t), 0.0)).transpose()?,
    };
    let spec = ObservableSpec {
        scorer: scorer.as_ref(),
        dos: scorer.is_some(),
        lowest_k: Some(lowest_k),
    };

    let summary = match &e.archive {
        Some(path) => {
            let (file, tmp) = staged(path)?;
            let mut writer = ArchiveWriter::new(BufWriter::new(file), &l, l.site_count())
                .map_err(|e| CliError::runtime(e.to_string()))?;
            let result = enumerate_all(&l, &opts, spec, Some(&mut writer));
            match result {
                Ok(s) => {
                    writer.finish().map_err(|e| CliError::runtime(e.to_string()))?;
                    commit(&tmp, path)?;
                    s
                }
                Err(err) => {
                    drop(writer);
                    let _ = fs::remove_file(&tmp);
                    return Err(enumeration_error(err));
                }
            }
        }
        None => enumerate_all::<BufWriter<File>>(&l, &opts, spec, None).map_err(enumeration_error)?,
    };

    let obs = &summary.observables;
    let out = out_dir(cfg);
    let mut report = EnumerationReport {
        dims: l.dims(),
        structures: obs.count,
        rules: opts.breaking == Breaking::Rules
            || (opts.breaking == Breaking::Auto && compactfold::enumeration::rules_supported(l.dims())),
        seed_len: summary.seed_len,
        seeds: summary.n_seeds,
        sequence: seq.as_ref().map(|(n, _)| n.clone()),
        minimum_energy: None,
        quantiles: Vec::new(),
    };

    if let Some(dos) = &obs.dos {
        let mut text = String::from("energy,count\n");
        for (&k, &c) in dos.bins() {
            writeln!(text, "{},{c}", energy(key_energy(k))).unwrap();
        }
        write_string(&out.join("dos.csv"), &text)?;
        report.minimum_energy = dos.min_energy();
        for q in QUANTILES {
            if let Ok(v) = dos.quantile(q) {
                report.quantiles.push((q, v));
            }
        }
    }
    if let Some(low) = &obs.lowest {
        let entries = low.sorted();
        let mut text = String::from("rank,energy,Q,path_hex\n");
        if let Some(first) = entries.first() {
            let native = Conformation::from_bytes(&first.path, &l)
                .map_err(|e| CliError::runtime(e.to_string()))?
                .contact_set(&l);
            for (rank, entry) in entries.iter().enumerate() {
                let conf = Conformation::from_bytes(&entry.path, &l).map_err(|e| CliError::runtime(e.to_string()))?;
                let q = conf.nativeness(&l, &native).map_err(|e| CliError::runtime(e.to_string()))?;
                writeln!(
                    text,
                    "{},{},{q},{}",
                    rank + 1,
                    energy(key_energy(entry.key)),
                    hex::encode(&entry.path)
                )
                .unwrap();
            }
        }
        write_string(&out.join("lowest.csv"), &text)?;
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::runtime(e.to_string()))?;
    write_string(&out.join("enumeration.json"), &json)?;

    println!("structures {}", obs.count);
    if let Some(e) = report.minimum_energy {
        println!("minimum energy {}", energy(e));
    }
    eprintln!(
        "{} seeds of length {} in {:.2} s",
        summary.n_seeds,
        summary.seed_len,
        summary.wall_time.as_secs_f64()
    );
    Ok(())
}

pub fn landscape(cfg: &Config) -> Result<(), CliError> {
    let l = lattice(cfg)?;
    let path = cfg
        .landscape
        .lowest
        .as_ref()
        .ok_or_else(|| CliError::usage("landscape needs a lowest-K file (--lowest)"))?;
    let rows = read_lowest(path)?;
    let conf = |row: &LowRow| {
        Conformation::from_bytes(&row.path, &l)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    };
    let native = conf(&rows[0])?.contact_set(&l);
    let base = energy_key(rows[0].energy);
    let mut text = String::from("rank,Q,delta_E\n");
    for (rank, row) in rows.iter().enumerate() {
        let q = conf(row)?.nativeness(&l, &native).map_err(|e| CliError::usage(e.to_string()))?;
        let delta = key_energy(energy_key(row.energy) - base);
        writeln!(text, "{},{q},{}", rank + 1, energy(delta)).unwrap();
    }
    let dest = out_dir(cfg).join("landscape.csv");
    write_string(&dest, &text)?;
    println!("{} structures -> {}", rows.len(), dest.display());
    Ok(())
}

pub fn lambda_sweep(cfg: &Config) -> Result<(), CliError> {
    let l = lattice(cfg)?;
    let (label, seq) = require_sequence(cfg)?;
    let m = require_matrix(cfg)?;
    let centre = lambda(cfg)?;
    let schedule = schedules(cfg)?.remove(0);
    let n_runs = runs(cfg)?;
    let base_seed = cfg.anneal.base_seed.unwrap_or(0);
    let reference = reference(cfg, None)?;
    let axes = cfg.sweep.axes.clone().unwrap_or_else(|| vec![1, 2, 3]);
    if axes.iter().any(|a| !(1..=3).contains(a)) {
        return Err(CliError::usage("axes must be 1, 2 or 3"));
    }
    let deltas = cfg.sweep.deltas.clone().unwrap_or_else(|| vec![-0.5, -0.25, 0.0, 0.25, 0.5]);

    let mut text = String::from("axis,delta,lambda1,lambda2,lambda3,success_rate,mean_E_f,mean_E2,frac_E2_positive\n");
    for &axis in &axes {
        for &delta in &deltas {
            let mut lam = centre.as_array();
            lam[axis - 1] += delta;
            let Ok(params) = LagrangeParams::new(lam[0], lam[1], lam[2]) else {
                eprintln!("skipping lambda{axis} {:+} (negative)", delta);
                continue;
            };
            let model = build_model(&seq, &l, &m, params).map_err(|e| CliError::usage(e.to_string()))?;
            let batch = run_batch(&model, &schedule, n_runs, base_seed, reference)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let positive = batch.runs.iter().filter(|r| r.final_terms.is_some_and(|t| t.e2 > 0.0)).count();
            writeln!(
                text,
                "{axis},{delta},{},{},{},{},{},{},{}",
                lam[0],
                lam[1],
                lam[2],
                opt(batch.stats.success_rate),
                batch.stats.mean_final_energy,
                batch.stats.mean_terms.map_or(String::new(), |t| t.e2.to_string()),
                positive as f64 / n_runs as f64
            )
            .unwrap();
            println!(
                "sequence {label} lambda{axis} {delta:+}: success {}",
                opt(batch.stats.success_rate)
            );
        }
    }
    write_string(&out_dir(cfg).join("lambda_sweep.csv"), &text)?;
    Ok(())
}
