//! Streaming observables over enumerated structures: an energy scorer,
//! the exact density of states and the lowest-K structure list.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::EnumerationError;
use crate::contact::ContactMatrix;
use crate::lattice::{Lattice, MAX_SITES};
use crate::sequence::Sequence;

/// Energy bin width of the density of states.
pub const ENERGY_RESOLUTION: f64 = 1e-6;

pub fn energy_key(energy: f64) -> i64 {
    (energy / ENERGY_RESOLUTION).round() as i64
}

pub fn key_energy(key: i64) -> f64 {
    key as f64 * ENERGY_RESOLUTION
}

/// Contact energy of byte paths with precomputed pair energies.
///
/// Contacts are summed in ascending `(i, j)` order, so the result is
/// bit-identical to [`crate::Conformation::energy`].
#[derive(Debug, Clone)]
pub struct EnergyScorer {
    n: usize,
    neighbors: Vec<Vec<u8>>,
    pair: Vec<f64>,
}

impl EnergyScorer {
    pub fn new(lattice: &Lattice, seq: &Sequence, matrix: &ContactMatrix) -> Self {
        let n = seq.len();
        let mut pair = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                pair[i * n + j] = matrix.get(seq.get(i), seq.get(j));
            }
        }
        Self {
            n,
            neighbors: (0..lattice.site_count())
                .map(|s| lattice.neighbors(s).iter().map(|&m| m as u8).collect())
                .collect(),
            pair,
        }
    }

    pub fn chain_length(&self) -> usize {
        self.n
    }

    pub fn score(&self, path: &[u8]) -> f64 {
        debug_assert_eq!(path.len(), self.n);
        let mut residue_at = [u8::MAX; MAX_SITES];
        for (i, &s) in path.iter().enumerate() {
            residue_at[s as usize] = i as u8;
        }
        let mut e = 0.0;
        let mut partners = [0u8; 6];
        for (i, &s) in path.iter().enumerate() {
            let mut k = 0;
            for &m in &self.neighbors[s as usize] {
                let j = residue_at[m as usize];
                if j != u8::MAX && j as usize > i + 1 {
                    partners[k] = j;
                    k += 1;
                }
            }
            partners[..k].sort_unstable();
            let row = &self.pair[i * self.n..];
            for &j in &partners[..k] {
                e -= row[j as usize];
            }
        }
        e
    }
}

/// Exact histogram of energies keyed at [`ENERGY_RESOLUTION`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityOfStates {
    bins: BTreeMap<i64, u64>,
    total: u64,
}

impl DensityOfStates {
    pub fn add(&mut self, energy: f64) {
        self.add_count(energy_key(energy), 1);
    }

    pub fn add_count(&mut self, key: i64, count: u64) {
        if count == 0 {
            return;
        }
        *self.bins.entry(key).or_default() += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &DensityOfStates) {
        for (&k, &c) in &other.bins {
            self.add_count(k, c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// `(energy, count)` in ascending energy order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.bins.iter().map(|(&k, &c)| (key_energy(k), c))
    }

    pub fn bins(&self) -> &BTreeMap<i64, u64> {
        &self.bins
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.bins.keys().next().map(|&k| key_energy(k))
    }

    /// Smallest energy whose cumulative count from below reaches
    /// `total / q`.
    pub fn quantile(&self, q: f64) -> Result<f64, EnumerationError> {
        if self.total == 0 {
            return Err(EnumerationError::EmptyDensity);
        }
        if !(q > 1.0) {
            return Err(EnumerationError::BadQuantile(q));
        }
        let threshold = self.total as f64 / q;
        let mut cum = 0u64;
        for (&k, &c) in &self.bins {
            cum += c;
            if cum as f64 >= threshold {
                return Ok(key_energy(k));
            }
        }
        unreachable!("cumulative count reaches the total")
    }

    pub fn quantiles(&self, qs: &[f64]) -> Result<Vec<f64>, EnumerationError> {
        qs.iter().map(|&q| self.quantile(q)).collect()
    }
}

/// One retained low-energy structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowEntry {
    pub key: i64,
    pub energy: f64,
    pub path: Vec<u8>,
}

impl Eq for LowEntry {}

impl Ord for LowEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key).then_with(|| self.path.cmp(&other.path))
    }
}

impl PartialOrd for LowEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` lowest-energy structures; ties broken by path order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "LowestKState", into = "LowestKState")]
pub struct LowestK {
    k: usize,
    heap: BinaryHeap<LowEntry>,
}

#[derive(Serialize, Deserialize)]
struct LowestKState {
    k: usize,
    entries: Vec<LowEntry>,
}

impl From<LowestKState> for LowestK {
    fn from(s: LowestKState) -> Self {
        let mut l = LowestK::new(s.k);
        for e in s.entries {
            l.push(e);
        }
        l
    }
}

impl From<LowestK> for LowestKState {
    fn from(l: LowestK) -> Self {
        LowestKState {
            k: l.k,
            entries: l.into_sorted(),
        }
    }
}

impl PartialEq for LowestK {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.sorted() == other.sorted()
    }
}

impl LowestK {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "K must be at least 1");
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn offer(&mut self, energy: f64, path: &[u8]) {
        let key = energy_key(energy);
        if self.heap.len() == self.k {
            let worst = self.heap.peek().unwrap();
            if (key, path) >= (worst.key, worst.path.as_slice()) {
                return;
            }
        }
        self.push(LowEntry {
            key,
            energy,
            path: path.to_vec(),
        });
    }

    fn push(&mut self, entry: LowEntry) {
        self.heap.push(entry);
        if self.heap.len() > self.k {
            self.heap.pop();
        }
    }

    pub fn merge(&mut self, other: LowestK) {
        for e in other.heap {
            self.push(e);
        }
    }

    /// Entries in ascending energy order.
    pub fn into_sorted(self) -> Vec<LowEntry> {
        self.heap.into_sorted_vec()
    }

    pub fn sorted(&self) -> Vec<LowEntry> {
        self.clone().into_sorted()
    }
}
