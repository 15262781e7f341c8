//! Single-bit-flip Metropolis dynamics with cached local fields.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::qubo::{BitState, QuboModel};

/// Relative tolerance for the cached energy against a full re-evaluation.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

/// Generator used for every run; seeded with `seed_from_u64`.
pub type AnnealRng = ChaCha8Rng;

pub fn rng_for(seed: u64) -> AnnealRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random bits, reproducible per seed.
pub fn random_state(n_bits: usize, seed: u64) -> BitState {
    let mut rng = rng_for(seed);
    random_state_with(n_bits, &mut rng)
}

pub fn random_state_with(n_bits: usize, rng: &mut impl Rng) -> BitState {
    BitState::from_bits((0..n_bits).map(|_| rng.gen::<bool>() as u8).collect())
}

/// Symmetric row structure of the quadratic part for O(degree) updates.
#[derive(Debug, Clone)]
pub struct Kernel<'m> {
    model: &'m QuboModel,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// Bits plus the cached local fields `h_k = a_k + sum_j Q_kj b_j` and total
/// energy.
#[derive(Debug, Clone)]
pub struct ChainState {
    bits: Vec<u8>,
    fields: Vec<f64>,
    energy: f64,
}

impl ChainState {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn to_bit_state(&self) -> BitState {
        BitState::from_bits(self.bits.clone())
    }

    /// Energy change from flipping bit `k`.
    #[inline]
    pub fn delta(&self, k: usize) -> f64 {
        if self.bits[k] == 0 {
            self.fields[k]
        } else {
            -self.fields[k]
        }
    }
}

impl<'m> Kernel<'m> {
    pub fn new(model: &'m QuboModel) -> Self {
        let n = model.n_bits();
        let mut degree = vec![0usize; n];
        for &(i, j, _) in model.quadratic() {
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let nnz = *offsets.last().unwrap();
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        let mut fill = offsets[..n].to_vec();
        for &(i, j, c) in model.quadratic() {
            for (a, b) in [(i, j), (j, i)] {
                let slot = &mut fill[a as usize];
                cols[*slot] = b;
                vals[*slot] = c;
                *slot += 1;
            }
        }
        Self {
            model,
            offsets,
            cols,
            vals,
        }
    }

    pub fn model(&self) -> &QuboModel {
        self.model
    }

    pub fn n_bits(&self) -> usize {
        self.model.n_bits()
    }

    #[inline]
    fn row(&self, k: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[k]..self.offsets[k + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    /// Builds the cached state for `bits`.
    ///
    /// # Panics
    /// If the length differs from the model's bit count.
    pub fn state(&self, bits: &BitState) -> ChainState {
        assert_eq!(bits.len(), self.n_bits(), "state length must match the model");
        let mut s = ChainState {
            bits: bits.as_slice().to_vec(),
            fields: Vec::new(),
            energy: 0.0,
        };
        self.resync(&mut s);
        s
    }

    fn fresh_fields(&self, bits: &[u8]) -> (Vec<f64>, f64) {
        let lin = self.model.linear();
        let mut fields = lin.to_vec();
        let mut energy = self.model.constant();
        for (k, f) in fields.iter_mut().enumerate() {
            let (cols, vals) = self.row(k);
            for (&j, &c) in cols.iter().zip(vals) {
                if bits[j as usize] == 1 {
                    *f += c;
                }
            }
        }
        for (k, &b) in bits.iter().enumerate() {
            if b == 1 {
                // each pair appears in both rows, so halve the quadratic part
                energy += 0.5 * (lin[k] + fields[k]);
            }
        }
        (fields, energy)
    }

    /// Recomputes fields and energy from scratch, returning the drift of the
    /// cached energy.
    pub fn resync(&self, s: &mut ChainState) -> f64 {
        let (fields, energy) = self.fresh_fields(&s.bits);
        let drift = (s.energy - energy).abs();
        s.fields = fields;
        s.energy = energy;
        drift
    }

    /// True when the cached energy agrees with a full evaluation.
    pub fn consistent(&self, s: &ChainState) -> bool {
        let exact = self.model.polynomial().evaluate(&s.bits);
        (s.energy - exact).abs() <= DRIFT_TOLERANCE * exact.abs().max(1.0)
    }

    #[inline]
    fn apply_flip(&self, s: &mut ChainState, k: usize, delta: f64) {
        let sign = if s.bits[k] == 0 { 1.0 } else { -1.0 };
        s.bits[k] ^= 1;
        s.energy += delta;
        let (cols, vals) = self.row(k);
        for (&j, &c) in cols.iter().zip(vals) {
            s.fields[j as usize] += sign * c;
        }
    }

    /// One sweep: `n_bits` flip attempts at uniformly drawn positions, each
    /// accepted with probability `min(1, exp(-beta * dE))`. Returns the
    /// number of accepted flips.
    pub fn sweep(&self, s: &mut ChainState, beta: f64, rng: &mut impl Rng) -> u64 {
        let n = self.n_bits();
        let mut accepted = 0;
        for _ in 0..n {
            let k = rng.gen_range(0..n);
            let delta = s.delta(k);
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                self.apply_flip(s, k, delta);
                accepted += 1;
            }
        }
        accepted
    }

    /// Like [`sweep`](Self::sweep) but calls `on_uphill` with the state
    /// just before every accepted energy increase.
    pub(crate) fn sweep_watch(
        &self,
        s: &mut ChainState,
        beta: f64,
        rng: &mut impl Rng,
        on_uphill: &mut impl FnMut(&ChainState),
    ) -> u64 {
        let n = self.n_bits();
        let mut accepted = 0;
        for _ in 0..n {
            let k = rng.gen_range(0..n);
            let delta = s.delta(k);
            if delta <= 0.0 {
                self.apply_flip(s, k, delta);
                accepted += 1;
            } else if rng.gen::<f64>() < (-beta * delta).exp() {
                on_uphill(s);
                self.apply_flip(s, k, delta);
                accepted += 1;
            }
        }
        accepted
    }
}
