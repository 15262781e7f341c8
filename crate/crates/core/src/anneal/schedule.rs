use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("number of temperatures must be at least 1")]
    NoTemperatures,
    #[error("temperature ratio must exceed 1, got {0}")]
    Ratio(f64),
    #[error("sweeps per temperature must be at least 1")]
    NoSweeps,
    #[error("inverse temperatures must be finite, non-negative and strictly increasing")]
    NotIncreasing,
}

/// Inverse temperatures visited in order, each for the same number of
/// sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    betas: Vec<f64>,
    sweeps_per_temp: u64,
}

impl Schedule {
    /// Arbitrary ladder; zero sweeps is allowed and leaves the state as is.
    pub fn new(betas: Vec<f64>, sweeps_per_temp: u64) -> Result<Self, ScheduleError> {
        if betas.is_empty() {
            return Err(ScheduleError::NoTemperatures);
        }
        let finite = betas.iter().all(|b| b.is_finite() && *b >= 0.0);
        if !finite || betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScheduleError::NotIncreasing);
        }
        Ok(Self {
            betas,
            sweeps_per_temp,
        })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn sweeps_per_temp(&self) -> u64 {
        self.sweeps_per_temp
    }

    pub fn total_sweeps(&self) -> u64 {
        self.sweeps_per_temp * self.betas.len() as u64
    }
}

/// Geometric ladder `beta_i = ratio^(i+1)` for `i = 0..n_temps`.
pub fn make_schedule(n_temps: usize, ratio: f64, sweeps: u64) -> Result<Schedule, ScheduleError> {
    if n_temps == 0 {
        return Err(ScheduleError::NoTemperatures);
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(ScheduleError::Ratio(ratio));
    }
    if sweeps == 0 {
        return Err(ScheduleError::NoSweeps);
    }
    let betas = (1..=n_temps as i32).map(|k| ratio.powi(k)).collect();
    Schedule::new(betas, sweeps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ladder() {
        let s = make_schedule(25, 1.05, 10_000).unwrap();
        assert_eq!(s.betas().len(), 25);
        assert_eq!(s.betas()[0], 1.05);
        assert!((s.betas()[24] - 3.386_354_9).abs() < 1e-6);
        assert_eq!(s.total_sweeps(), 250_000);
    }

    #[test]
    fn single_temperature() {
        assert_eq!(make_schedule(1, 2.0, 5).unwrap().betas(), &[2.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(make_schedule(3, 1.0, 5), Err(ScheduleError::Ratio(1.0)));
        assert_eq!(make_schedule(0, 1.05, 5), Err(ScheduleError::NoTemperatures));
        assert_eq!(make_schedule(3, 1.05, 0), Err(ScheduleError::NoSweeps));
        assert!(make_schedule(3, f64::NAN, 5).is_err());
        assert_eq!(Schedule::new(vec![1.0, 1.0], 1), Err(ScheduleError::NotIncreasing));
        assert_eq!(Schedule::new(vec![-1.0], 1), Err(ScheduleError::NotIncreasing));
        assert!(Schedule::new(vec![0.0, 0.5], 0).is_ok());
    }
}
