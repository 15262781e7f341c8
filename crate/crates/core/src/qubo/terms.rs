//! Direct closed-form evaluation of the four energy terms.

use serde::{Deserialize, Serialize};

use super::bits::BitState;
use super::model::{LagrangeParams, QuboError};
use crate::contact::ContactMatrix;
use crate::lattice::Lattice;
use crate::sequence::Sequence;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TermEnergies {
    pub e_mj: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl TermEnergies {
    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            e_mj: a[0],
            e1: a[1],
            e2: a[2],
            e3: a[3],
        }
    }

    pub fn total(&self, lambda: &LagrangeParams) -> f64 {
        self.e_mj + lambda.lambda1 * self.e1 + lambda.lambda2 * self.e2 + lambda.lambda3 * self.e3
    }

    pub fn penalties_zero(&self) -> bool {
        self.e1 == 0.0 && self.e2 == 0.0 && self.e3 == 0.0
    }
}

/// Evaluates E_MJ, E1, E2 and E3 on arbitrary bits, independently of any
/// built QUBO. On a valid chain E_MJ is bit-identical to the conformation
/// energy: contributions are subtracted in ascending `(i, j)` order.
pub fn eval_terms(
    bits: &BitState,
    seq: &Sequence,
    lattice: &Lattice,
    matrix: &ContactMatrix,
) -> Result<TermEnergies, QuboError> {
    let n = seq.len();
    let l = lattice.site_count();
    if bits.len() != n * l {
        return Err(QuboError::LengthMismatch {
            expected: n * l,
            got: bits.len(),
        });
    }
    let b = bits.as_slice();
    let occupied: Vec<Vec<usize>> = (0..n).map(|i| bits.sites_of(i, l).collect()).collect();

    let mut e_mj = 0.0;
    for i in 0..n {
        if occupied[i].is_empty() {
            continue;
        }
        for j in i + 2..n {
            let row = &b[j * l..(j + 1) * l];
            let count: u32 = occupied[i]
                .iter()
                .flat_map(|&s| lattice.neighbors(s))
                .map(|&m| row[m] as u32)
                .sum();
            if count != 0 {
                e_mj -= matrix.get(seq.get(i), seq.get(j)) * count as f64;
            }
        }
    }

    let e1: i64 = occupied
        .iter()
        .map(|o| {
            let d = o.len() as i64 - 1;
            d * d
        })
        .sum();

    let mut e2: i64 = 0;
    for s in 0..l {
        let c = (0..n).filter(|&i| b[i * l + s] != 0).count() as i64;
        e2 += c * (c - 1) / 2;
    }

    let mut e3: i64 = 0;
    for i in 0..n.saturating_sub(1) {
        let next = &b[(i + 1) * l..(i + 2) * l];
        for &s in &occupied[i] {
            e3 += lattice
                .far_sites(s)
                .iter()
                .filter(|&&m| next[m] != 0)
                .count() as i64;
        }
    }

    Ok(TermEnergies {
        e_mj,
        e1: e1 as f64,
        e2: e2 as f64,
        e3: e3 as f64,
    })
}
