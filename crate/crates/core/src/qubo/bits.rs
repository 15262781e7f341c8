//! Occupancy bit states and the conformation <-> bits mapping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conformation::Conformation;
use crate::lattice::Lattice;

/// `N * L` occupancy bits, one byte each; bit `(i, n)` lives at `i * L + n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitState {
    bits: Vec<u8>,
}

impl BitState {
    pub fn zeros(n_bits: usize) -> Self {
        Self {
            bits: vec![0; n_bits],
        }
    }

    /// Takes raw bits; any nonzero byte counts as 1.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        Self {
            bits: bits.into_iter().map(|b| (b != 0) as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index] != 0
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value as u8;
    }

    pub fn flip(&mut self, index: usize) {
        self.bits[index] ^= 1;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    /// Sites occupied by residue `i` on a lattice of `n_sites` sites.
    pub fn sites_of(&self, i: usize, n_sites: usize) -> impl Iterator<Item = usize> + '_ {
        self.bits[i * n_sites..(i + 1) * n_sites]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(s, _)| s)
    }

    /// Packs into little-endian 64-bit words, bit `k` in word `k / 64`.
    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.bits.len().div_ceil(64)];
        for (k, &b) in self.bits.iter().enumerate() {
            if b != 0 {
                words[k / 64] |= 1 << (k % 64);
            }
        }
        words
    }

    pub fn from_words(words: &[u64], n_bits: usize) -> Self {
        Self {
            bits: (0..n_bits)
                .map(|k| ((words[k / 64] >> (k % 64)) & 1) as u8)
                .collect(),
        }
    }
}

/// Sets bit `(i, path[i])` for each residue.
pub fn encode(conf: &Conformation, lattice: &Lattice) -> BitState {
    let l = lattice.site_count();
    let mut state = BitState::zeros(conf.len() * l);
    for (i, &site) in conf.path().iter().enumerate() {
        state.set(i * l + site, true);
    }
    state
}

/// Why a bit state does not describe a chain. Residues are 0-based here and
/// printed 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PenaltyViolation {
    /// Occupancy: residue on zero or several sites.
    Occupancy { residue: usize, sites: Vec<usize> },
    /// Self-avoidance: several residues on one site.
    SharedSite { site: usize, residues: Vec<usize> },
    /// Connectivity: residues `residue`, `residue + 1` on sites further
    /// apart than one lattice spacing.
    BrokenBond {
        residue: usize,
        from: usize,
        to: usize,
    },
}

impl fmt::Display for PenaltyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyViolation::Occupancy { residue, sites } => {
                write!(f, "E1: residue {} on {} sites {:?}", residue + 1, sites.len(), sites)
            }
            PenaltyViolation::SharedSite { site, residues } => {
                let r: Vec<usize> = residues.iter().map(|r| r + 1).collect();
                write!(f, "E2: site {site} holds residues {r:?}")
            }
            PenaltyViolation::BrokenBond { residue, from, to } => write!(
                f,
                "E3: bond ({},{}) spans sites {from} and {to}",
                residue + 1,
                residue + 2
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    pub violations: Vec<PenaltyViolation>,
}

impl fmt::Display for DecodeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for DecodeReport {}

/// Recovers the conformation from a state with all three penalties zero.
///
/// `bits.len()` must be a multiple of the site count; the residue count is
/// inferred from it.
pub fn decode(bits: &BitState, lattice: &Lattice) -> Result<Conformation, DecodeReport> {
    let l = lattice.site_count();
    assert!(
        l > 0 && bits.len() % l == 0,
        "bit count {} is not a multiple of the site count {l}",
        bits.len()
    );
    let n = bits.len() / l;
    let mut violations = Vec::new();

    let placements: Vec<Vec<usize>> = (0..n).map(|i| bits.sites_of(i, l).collect()).collect();
    for (i, sites) in placements.iter().enumerate() {
        if sites.len() != 1 {
            violations.push(PenaltyViolation::Occupancy {
                residue: i,
                sites: sites.clone(),
            });
        }
    }

    for site in 0..l {
        let residues: Vec<usize> = (0..n).filter(|&i| bits.get(i * l + site)).collect();
        if residues.len() > 1 {
            violations.push(PenaltyViolation::SharedSite { site, residues });
        }
    }

    for i in 0..n.saturating_sub(1) {
        for &from in &placements[i] {
            for &to in &placements[i + 1] {
                if to != from && !lattice.are_neighbors(from, to) {
                    violations.push(PenaltyViolation::BrokenBond {
                        residue: i,
                        from,
                        to,
                    });
                }
            }
        }
    }

    if !violations.is_empty() {
        return Err(DecodeReport { violations });
    }
    Ok(Conformation::from_valid(
        placements.into_iter().map(|s| s[0]).collect(),
    ))
}
