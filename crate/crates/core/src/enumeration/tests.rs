use std::collections::BTreeSet;
use std::io::Cursor;
use std::time::Duration;

use super::*;
use crate::contact::ContactMatrix;
use crate::conformation::Conformation;
use crate::lattice::Lattice;
use crate::sequence::{AminoAcid, Sequence};

fn lattice(dims: [usize; 3]) -> Lattice {
    Lattice::new(dims).unwrap()
}

/// Plain depth-first count of directed Hamiltonian paths, no symmetry.
fn directed_paths(l: &Lattice) -> u64 {
    fn go(l: &Lattice, last: usize, visited: &mut [bool], depth: usize) -> u64 {
        if depth == visited.len() {
            return 1;
        }
        let mut total = 0;
        for &m in l.neighbors(last) {
            if !visited[m] {
                visited[m] = true;
                total += go(l, m, visited, depth + 1);
                visited[m] = false;
            }
        }
        total
    }
    let n = l.site_count();
    (0..n)
        .map(|s| {
            let mut visited = vec![false; n];
            visited[s] = true;
            go(l, s, &mut visited, 1)
        })
        .sum()
}

fn collect(l: &Lattice, breaking: Breaking) -> Vec<Vec<u8>> {
    let e = Enumerator::new(l, breaking).unwrap();
    let mut out = Vec::new();
    for root in e.roots() {
        e.extend_all(root, &mut |p| out.push(p.to_vec()));
    }
    out
}

fn mixed_sequence(n: usize) -> Sequence {
    let all: Vec<AminoAcid> = AminoAcid::all().collect();
    Sequence::new((0..n).map(|i| all[(i * 7 + 3) % 20]).collect()).unwrap()
}

fn mixed_matrix() -> ContactMatrix {
    ContactMatrix::from_fn(|a, b| 0.1 + ((a.index() * 13 + b.index() * 13 + a.index() * b.index()) % 17) as f64 * 0.25)
}

#[test]
fn canonical_counts_match_directed_counts() {
    for dims in [[2, 2, 2], [2, 2, 3], [3, 3, 2], [4, 3, 2], [4, 4, 1], [2, 3, 3]] {
        let l = lattice(dims);
        let g = SymmetryGroup::of_lattice(&l);
        let paths = collect(&l, Breaking::Canonical);
        assert_eq!(paths.len() as u64 * g.len() as u64, directed_paths(&l), "{dims:?}");
        for p in &paths {
            assert!(g.is_canonical(p), "{dims:?} {p:?}");
        }
    }
}

#[test]
fn cube_counts() {
    assert_eq!(collect(&lattice([2, 2, 2]), Breaking::Auto).len(), 3);
    let l = lattice([3, 3, 3]);
    let s = enumerate_observables(&l, &EnumerationOptions::default(), ObservableSpec::default())
        .unwrap();
    assert_eq!(s.observables.count, 103_346);
    assert_eq!(s.observables.count * 48, 4_960_608);
}

#[test]
fn rules_cover_each_orbit_once() {
    for dims in [[2, 2, 1], [2, 2, 3], [4, 4, 1], [2, 2, 5]] {
        let l = lattice(dims);
        assert!(rules_supported(dims));
        let g = SymmetryGroup::of_lattice(&l);
        let rules = collect(&l, Breaking::Rules);
        let canonical: BTreeSet<Vec<u8>> = collect(&l, Breaking::Canonical).into_iter().collect();
        let images: BTreeSet<Vec<u8>> = rules.iter().map(|p| g.canonical_form(p)).collect();
        assert_eq!(rules.len(), canonical.len(), "{dims:?}");
        assert_eq!(images, canonical, "{dims:?}");
    }
}

#[test]
fn starting_points_of_443() {
    let l = lattice([4, 4, 3]);
    let pts = starting_points(&l).unwrap();
    let got: Vec<([usize; 3], bool, bool)> = pts
        .iter()
        .map(|p| (l.coords(p.site), p.diagonal_unbroken, p.z_unbroken))
        .collect();
    assert_eq!(
        got,
        vec![
            ([0, 0, 0], true, false),
            ([1, 0, 0], false, false),
            ([1, 1, 0], true, false),
            ([0, 0, 1], true, true),
            ([1, 0, 1], false, true),
            ([1, 1, 1], true, true),
        ]
    );
    assert!(matches!(
        starting_points(&lattice([3, 3, 3])),
        Err(EnumerationError::UnsupportedDims(_))
    ));
    assert!(Enumerator::new(&lattice([3, 3, 3]), Breaking::Rules).is_err());
}

/// First `count` admissible prefixes of length `target` below `p`, depth
/// first.
fn deep_prefixes(e: &Enumerator, p: PartialPath, target: usize, count: usize, out: &mut Vec<PartialPath>) {
    if out.len() >= count {
        return;
    }
    if p.len() == target {
        out.push(p);
        return;
    }
    for q in e.extend_once(std::slice::from_ref(&p)) {
        deep_prefixes(e, q, target, count, out);
    }
}

#[test]
fn deep_443_seeds_complete_to_compact_structures() {
    let l = lattice([4, 4, 3]);
    let e = Enumerator::new(&l, Breaking::Rules).unwrap();
    assert!(e.uses_rules());
    let seeds = e.seeds(8).unwrap();
    let mut checked = 0;
    for seed in seeds.iter().step_by(seeds.len() / 5) {
        let mut deep = Vec::new();
        deep_prefixes(&e, seed.clone(), 34, 20, &mut deep);
        for d in &deep {
            e.extend_all(d, &mut |p| {
                let c = Conformation::from_bytes(p, &l).unwrap();
                assert!(c.is_compact(&l));
                assert_eq!(c.contact_set(&l).len(), 57);
                checked += 1;
            });
        }
    }
    assert!(checked > 0);
}

#[test]
fn seeds_reject_bad_lengths() {
    let e = Enumerator::new(&lattice([2, 2, 2]), Breaking::Auto).unwrap();
    assert!(matches!(e.seeds(0), Err(EnumerationError::SeedLength { .. })));
    assert!(matches!(e.seeds(9), Err(EnumerationError::SeedLength { .. })));
    assert_eq!(e.seeds(8).unwrap().len(), 3);
}

#[test]
fn partial_follows_admission() {
    let l = lattice([2, 2, 2]);
    let e = Enumerator::new(&l, Breaking::Canonical).unwrap();
    assert!(e.partial(&[0, 1]).is_some());
    assert!(e.partial(&[0, 7]).is_none());
    assert!(e.partial(&[0, 1, 0]).is_none());
    // (0 -> 2) is the mirror image of (0 -> 1)
    assert!(e.partial(&[0, 2]).is_none());
}

#[test]
fn results_independent_of_threads_and_seeding() {
    let l = lattice([3, 3, 2]);
    let seq = mixed_sequence(18);
    let scorer = EnergyScorer::new(&l, &seq, &mixed_matrix());
    let spec = ObservableSpec {
        scorer: Some(&scorer),
        dos: true,
        lowest_k: Some(10),
    };
    let base = enumerate_observables(
        &l,
        &EnumerationOptions {
            threads: 1,
            seed_len: Some(1),
            ..Default::default()
        },
        spec,
    )
    .unwrap()
    .observables;
    for (threads, seed_len, chunk) in [(4, Some(5), 3), (2, None, 1000), (3, Some(9), 17)] {
        let other = enumerate_observables(
            &l,
            &EnumerationOptions {
                threads,
                seed_len,
                chunk_seeds: chunk,
                ..Default::default()
            },
            spec,
        )
        .unwrap()
        .observables;
        assert_eq!(other, base);
    }
}

#[test]
fn observables_match_sorted_oracle() {
    let l = lattice([3, 3, 2]);
    let seq = mixed_sequence(18);
    let m = mixed_matrix();
    let scorer = EnergyScorer::new(&l, &seq, &m);
    let s = enumerate_observables(
        &l,
        &EnumerationOptions::default(),
        ObservableSpec {
            scorer: Some(&scorer),
            dos: true,
            lowest_k: Some(25),
        },
    )
    .unwrap();

    let mut all: Vec<(f64, Vec<u8>)> = collect(&l, Breaking::Auto)
        .into_iter()
        .map(|p| {
            let path: Vec<usize> = p.iter().map(|&s| s as usize).collect();
            let e = Conformation::new(path, &l).unwrap().energy(&l, &seq, &m).unwrap();
            (e, p)
        })
        .collect();
    for (e, p) in &all {
        assert_eq!(scorer.score(p).to_bits(), e.to_bits());
    }
    all.sort_by(|a, b| energy_key(a.0).cmp(&energy_key(b.0)).then(a.1.cmp(&b.1)));

    let dos = s.observables.dos.unwrap();
    assert_eq!(dos.total(), all.len() as u64);
    assert_eq!(dos.min_energy().unwrap(), key_energy(energy_key(all[0].0)));
    for q in [2.0, 3.5, 100.0, 1e8] {
        let idx = ((all.len() as f64 / q).ceil() as usize).max(1) - 1;
        assert_eq!(dos.quantile(q).unwrap(), key_energy(energy_key(all[idx].0)), "q={q}");
    }
    assert!(matches!(dos.quantile(1.0), Err(EnumerationError::BadQuantile(_))));
    assert!(matches!(
        DensityOfStates::default().quantile(2.0),
        Err(EnumerationError::EmptyDensity)
    ));

    let low = s.observables.lowest.unwrap().into_sorted();
    assert_eq!(low.len(), 25);
    for (entry, (e, p)) in low.iter().zip(&all) {
        assert_eq!(&entry.path, p);
        assert_eq!(entry.energy, *e);
    }
}

#[test]
fn scorer_rejects_wrong_chain_length() {
    let l = lattice([2, 2, 2]);
    let scorer = EnergyScorer::new(&l, &mixed_sequence(6), &mixed_matrix());
    let err = enumerate_observables(
        &l,
        &EnumerationOptions::default(),
        ObservableSpec {
            scorer: Some(&scorer),
            ..Default::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, EnumerationError::NotCompact { chain: 6, sites: 8 }));
}

#[test]
fn interrupt_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let l = lattice([3, 3, 2]);
    let seq = mixed_sequence(18);
    let scorer = EnergyScorer::new(&l, &seq, &mixed_matrix());
    let spec = ObservableSpec {
        scorer: Some(&scorer),
        dos: true,
        lowest_k: Some(5),
    };
    let full = enumerate_observables(&l, &EnumerationOptions::default(), spec).unwrap();

    let opts = EnumerationOptions {
        seed_len: Some(6),
        chunk_seeds: 4,
        checkpoint: Some(CheckpointOptions {
            path: path.clone(),
            interval: Duration::ZERO,
            resume: true,
        }),
        time_limit: Some(Duration::ZERO),
        ..Default::default()
    };
    match enumerate_observables(&l, &opts, spec) {
        Err(EnumerationError::Interrupted {
            completed: 0,
            checkpoint: Some(p),
            ..
        }) => assert_eq!(p, path),
        other => panic!("expected interruption, got {other:?}"),
    }
    assert!(path.exists());

    // process a few chunks, then stop
    let partial = EnumerationOptions {
        time_limit: None,
        ..opts.clone()
    };
    let e = Enumerator::new(&l, Breaking::Auto).unwrap();
    let n_seeds = e.seeds(6).unwrap().len();
    let resumed = enumerate_observables(&l, &partial, spec).unwrap();
    assert_eq!(resumed.n_seeds, n_seeds);
    assert_eq!(resumed.observables, full.observables);

    let again = enumerate_observables(&l, &partial, spec).unwrap();
    assert_eq!(again.resumed_seeds, n_seeds);
    assert_eq!(again.observables, full.observables);

    let mismatched = EnumerationOptions {
        seed_len: Some(4),
        ..partial.clone()
    };
    assert!(matches!(
        enumerate_observables(&l, &mismatched, spec),
        Err(EnumerationError::Checkpoint(_))
    ));
}

#[test]
fn archive_round_trip() {
    let l = lattice([3, 3, 2]);
    let mut writer = ArchiveWriter::new(Cursor::new(Vec::new()), &l, 18).unwrap();
    let s = enumerate_all(
        &l,
        &EnumerationOptions {
            threads: 3,
            seed_len: Some(4),
            chunk_seeds: 5,
            ..Default::default()
        },
        ObservableSpec::default(),
        Some(&mut writer),
    )
    .unwrap();
    let bytes = writer.finish().unwrap().into_inner();
    let archive = read_archive(bytes.as_slice()).unwrap();
    assert_eq!(archive.len() as u64, s.observables.count);
    assert_eq!(archive.header.dims, [3, 3, 2]);
    assert_eq!(archive.lattice().unwrap().dims(), [3, 3, 2]);

    // seed-major depth-first order matches a serial walk
    let serial: Vec<Vec<u8>> = {
        let e = Enumerator::new(&l, Breaking::Auto).unwrap();
        let mut out = Vec::new();
        for seed in e.seeds(4).unwrap() {
            e.extend_all(&seed, &mut |p| out.push(p.to_vec()));
        }
        out
    };
    let stored: Vec<Vec<u8>> = archive.paths().map(<[u8]>::to_vec).collect();
    assert_eq!(stored, serial);

    let mut corrupt = bytes.clone();
    corrupt[HEADER_OFFSET_FIRST_RECORD + 1] = corrupt[HEADER_OFFSET_FIRST_RECORD];
    assert!(matches!(
        read_archive(corrupt.as_slice()),
        Err(ArchiveError::InvalidPath { index: 0, .. })
    ));
    let mut out_of_range = bytes.clone();
    out_of_range[HEADER_OFFSET_FIRST_RECORD] = 200;
    assert!(matches!(
        read_archive(out_of_range.as_slice()),
        Err(ArchiveError::InvalidSite { index: 0, position: 0, value: 200 })
    ));
    assert!(matches!(
        read_archive(&bytes[..bytes.len() - 1]),
        Err(ArchiveError::Truncated { .. })
    ));
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(read_archive(trailing.as_slice()), Err(ArchiveError::Trailing(1))));
    let mut magic = bytes;
    magic[0] = b'X';
    assert!(matches!(read_archive(magic.as_slice()), Err(ArchiveError::BadMagic)));
}

const HEADER_OFFSET_FIRST_RECORD: usize = 19;

#[test]
fn archive_with_resume_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let l = lattice([2, 2, 2]);
    let mut writer = ArchiveWriter::new(Cursor::new(Vec::new()), &l, 8).unwrap();
    let opts = EnumerationOptions {
        checkpoint: Some(CheckpointOptions {
            path: dir.path().join("cp.json"),
            interval: Duration::from_secs(60),
            resume: true,
        }),
        ..Default::default()
    };
    assert!(matches!(
        enumerate_all(&l, &opts, ObservableSpec::default(), Some(&mut writer)),
        Err(EnumerationError::Checkpoint(_))
    ));
}
