//! Homogeneous Poisson firing times.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Strictly increasing firing times in seconds, all in `[0, duration_s)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub times_s: Vec<f64>,
    pub duration_s: f64,
}

impl SpikeTrain {
    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }
}

pub fn poisson_spike_train(rate_hz: f64, duration_s: f64, seed: u64) -> Result<SpikeTrain> {
    let mut rng = seed::rng(seed);
    Ok(SpikeTrain {
        times_s: poisson_times(rate_hz, 0.0, duration_s, &mut rng)?,
        duration_s,
    })
}

/// Poisson arrivals in `[start_s, end_s)` by exponential inter-arrival draws.
pub fn poisson_times<R: Rng + ?Sized>(rate_hz: f64, start_s: f64, end_s: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(rate_hz >= 0.0 && rate_hz.is_finite()) {
        return Err(Error::InvalidArgument(format!("firing rate must be >= 0, got {rate_hz}")));
    }
    if !(end_s >= start_s) {
        return Err(Error::InvalidArgument(format!("empty interval {start_s}..{end_s}")));
    }
    let mut times = Vec::new();
    if rate_hz == 0.0 {
        return Ok(times);
    }
    let exp = Exp::new(rate_hz).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut t = start_s;
    loop {
        t += exp.sample(rng);
        if t >= end_s {
            break;
        }
        // Exp draws can be zero in floating point; keep times strictly increasing.
        if times.last().is_some_and(|&last| t <= last) {
            continue;
        }
        times.push(t);
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_silent() {
        assert!(poisson_spike_train(0.0, 100.0, 3).unwrap().is_empty());
    }

    #[test]
    fn deterministic_and_ordered() {
        let a = poisson_spike_train(20.0, 10.0, 9).unwrap();
        assert_eq!(a, poisson_spike_train(20.0, 10.0, 9).unwrap());
        assert!(a.times_s.windows(2).all(|w| w[0] < w[1]));
        assert!(a.times_s.iter().all(|&t| (0.0..10.0).contains(&t)));
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(poisson_spike_train(-1.0, 1.0, 0).is_err());
    }
}
