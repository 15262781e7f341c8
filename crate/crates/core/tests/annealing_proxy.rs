//! Small-lattice stand-in for the 48-residue benchmark: annealing on the
//! QUBO should find the minimum that exact enumeration reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use compactfold::anneal::{make_schedule, run_batch};
use compactfold::enumeration::{enumerate_observables, EnergyScorer, EnumerationOptions, ObservableSpec};
use compactfold::qubo::{build_qubo, LagrangeParams};
use compactfold::{AminoAcid, ContactMatrix, Lattice, Sequence};

#[test]
fn annealing_reaches_enumerated_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let all: Vec<AminoAcid> = AminoAcid::all().collect();
    let l = Lattice::new([2, 2, 3]).unwrap();
    let seq = Sequence::new((0..12).map(|_| all[rng.gen_range(0..all.len())]).collect()).unwrap();
    let m = ContactMatrix::from_fn(|_, _| rng.gen_range(0.0..1.0));

    let scorer = EnergyScorer::new(&l, &seq, &m);
    let spec = ObservableSpec { scorer: Some(&scorer), dos: true, lowest_k: None };
    let obs = enumerate_observables(&l, &EnumerationOptions::default(), spec).unwrap().observables;
    let minimum = obs.dos.unwrap().min_energy().unwrap();

    let model = build_qubo(&seq, &l, &m, LagrangeParams::default()).unwrap();
    let schedule = make_schedule(60, 1.05, 1000).unwrap();
    let batch = run_batch(&model, &schedule, 10, 0, Some(minimum)).unwrap();
    let rate = batch.stats.success_rate.unwrap();
    println!("minimum {minimum:.6}, success rate {rate}");
    assert!(rate >= 0.3, "success rate {rate}");
    assert!(batch.runs.iter().all(|r| (r.best_energy - minimum).abs() < 1e-6));
}
