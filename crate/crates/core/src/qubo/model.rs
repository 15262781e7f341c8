use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bits::BitState;
use crate::contact::ContactMatrix;
use crate::lattice::Lattice;
use crate::sequence::Sequence;

#[derive(Debug, Error, PartialEq)]
pub enum QuboError {
    #[error("Lagrange parameter {name} = {value} must be finite and non-negative")]
    BadLambda { name: &'static str, value: f64 },
    #[error("bit state has {got} bits, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Penalty weights `(lambda1, lambda2, lambda3)` for one-site-per-residue,
/// self-avoidance and chain connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Default for LagrangeParams {
    fn default() -> Self {
        Self {
            lambda1: 1.5,
            lambda2: 2.0,
            lambda3: 2.0,
        }
    }
}

impl LagrangeParams {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self, QuboError> {
        let p = Self {
            lambda1,
            lambda2,
            lambda3,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), QuboError> {
        for (name, value) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(QuboError::BadLambda { name, value });
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }
}

/// A quadratic pseudo-Boolean polynomial
/// `constant + sum_i linear[i] b_i + sum_{i<j} q_ij b_i b_j`.
///
/// Quadratic entries are sorted by `(i, j)` with `i < j`, each pair once.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub n_bits: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<(u32, u32, f64)>,
    pub constant: f64,
}

impl Polynomial {
    pub fn zero(n_bits: usize) -> Self {
        Self {
            n_bits,
            linear: vec![0.0; n_bits],
            quadratic: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn evaluate(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.n_bits);
        let mut e = self.constant;
        for (b, c) in bits.iter().zip(&self.linear) {
            if *b != 0 {
                e += c;
            }
        }
        for &(i, j, c) in &self.quadratic {
            if bits[i as usize] != 0 && bits[j as usize] != 0 {
                e += c;
            }
        }
        e
    }

    /// Sorts raw `(i, j, c)` entries (any orientation, duplicates allowed)
    /// into canonical form. Duplicates are summed in input order and exact
    /// zeros dropped.
    fn canonicalize(mut raw: Vec<(u32, u32, f64)>) -> Vec<(u32, u32, f64)> {
        for e in raw.iter_mut() {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
            debug_assert_ne!(e.0, e.1, "diagonal entries belong in the linear part");
        }
        raw.sort_by_key(|&(i, j, _)| (i, j));
        let mut out: Vec<(u32, u32, f64)> = Vec::with_capacity(raw.len());
        for (i, j, c) in raw {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += c,
                _ => out.push((i, j, c)),
            }
        }
        out.retain(|e| e.2 != 0.0);
        out
    }
}

/// The QUBO for one sequence on one lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    poly: Polynomial,
    /// Unweighted contact, occupancy, self-avoidance and connectivity
    /// polynomials. Absent for models read back from a file.
    parts: Option<Box<[Polynomial; 4]>>,
    n_residues: usize,
    n_sites: usize,
}

impl QuboModel {
    pub fn from_polynomial(poly: Polynomial) -> Self {
        Self {
            n_residues: 0,
            n_sites: 0,
            poly,
            parts: None,
        }
    }

    pub fn n_bits(&self) -> usize {
        self.poly.n_bits
    }

    pub fn linear(&self) -> &[f64] {
        &self.poly.linear
    }

    pub fn quadratic(&self) -> &[(u32, u32, f64)] {
        &self.poly.quadratic
    }

    pub fn constant(&self) -> f64 {
        self.poly.constant
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn parts(&self) -> Option<&[Polynomial; 4]> {
        self.parts.as_deref()
    }

    /// `(N, L)` for models built from a folding problem.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.parts.as_ref().map(|_| (self.n_residues, self.n_sites))
    }

    pub fn energy(&self, bits: &BitState) -> Result<f64, QuboError> {
        self.check_len(bits.len())?;
        Ok(self.poly.evaluate(bits.as_slice()))
    }

    /// Unweighted `[E_MJ, E1, E2, E3]` from the stored decomposition.
    pub fn term_values(&self, bits: &[u8]) -> Option<[f64; 4]> {
        let parts = self.parts.as_ref()?;
        Some([
            parts[0].evaluate(bits),
            parts[1].evaluate(bits),
            parts[2].evaluate(bits),
            parts[3].evaluate(bits),
        ])
    }

    fn check_len(&self, got: usize) -> Result<(), QuboError> {
        if got != self.n_bits() {
            return Err(QuboError::LengthMismatch {
                expected: self.n_bits(),
                got,
            });
        }
        Ok(())
    }
}

/// Builds `E = E_MJ + l1 E1 + l2 E2 + l3 E3` over `N * L` bits, bit
/// `b(i, n)` at flat index `i * L + n`.
pub fn build_qubo(
    seq: &Sequence,
    lattice: &Lattice,
    matrix: &ContactMatrix,
    lambda: LagrangeParams,
) -> Result<QuboModel, QuboError> {
    lambda.validate()?;
    let n = seq.len();
    let l = lattice.site_count();
    let n_bits = n * l;
    let bit = |i: usize, site: usize| (i * l + site) as u32;

    // Contact term: -C(a_i, a_j) on b(i,n) b(j,m) for j >= i + 2 and every
    // ordered neighbor pair (n, m), so each lattice edge counts once per
    // residue pair orientation.
    let mut contact = Polynomial::zero(n_bits);
    let mut raw = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            let c = matrix.get(seq.get(i), seq.get(j));
            if c == 0.0 {
                continue;
            }
            for s in 0..l {
                for &m in lattice.neighbors(s) {
                    raw.push((bit(i, s), bit(j, m), -c));
                }
            }
        }
    }
    contact.quadratic = Polynomial::canonicalize(raw);

    // Occupancy: sum_i (sum_n b - 1)^2 with b^2 = b.
    let mut occupancy = Polynomial::zero(n_bits);
    occupancy.constant = n as f64;
    occupancy.linear.fill(-1.0);
    let mut raw = Vec::new();
    for i in 0..n {
        for s in 0..l {
            for t in s + 1..l {
                raw.push((bit(i, s), bit(i, t), 2.0));
            }
        }
    }
    occupancy.quadratic = Polynomial::canonicalize(raw);

    // Self-avoidance: one unit per pair of residues sharing a site.
    let mut avoidance = Polynomial::zero(n_bits);
    let mut raw = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for s in 0..l {
                raw.push((bit(i, s), bit(j, s), 1.0));
            }
        }
    }
    avoidance.quadratic = Polynomial::canonicalize(raw);

    // Connectivity: bonded residues on sites further apart than one spacing.
    let mut connectivity = Polynomial::zero(n_bits);
    let mut raw = Vec::new();
    for i in 0..n.saturating_sub(1) {
        for s in 0..l {
            for &m in lattice.far_sites(s) {
                raw.push((bit(i, s), bit(i + 1, m), 1.0));
            }
        }
    }
    connectivity.quadratic = Polynomial::canonicalize(raw);

    let parts = [contact, occupancy, avoidance, connectivity];
    let weights = [1.0, lambda.lambda1, lambda.lambda2, lambda.lambda3];
    let poly = combine(&parts, &weights, n_bits);
    Ok(QuboModel {
        poly,
        parts: Some(Box::new(parts)),
        n_residues: n,
        n_sites: l,
    })
}

fn combine(parts: &[Polynomial; 4], weights: &[f64; 4], n_bits: usize) -> Polynomial {
    let mut out = Polynomial::zero(n_bits);
    let mut raw = Vec::new();
    for (p, &w) in parts.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        out.constant += w * p.constant;
        for (acc, c) in out.linear.iter_mut().zip(&p.linear) {
            *acc += w * c;
        }
        raw.extend(p.quadratic.iter().map(|&(i, j, c)| (i, j, w * c)));
    }
    out.quadratic = Polynomial::canonicalize(raw);
    out
}
