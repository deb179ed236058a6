//! Sample statistics for Monte Carlo estimates.

use serde::{Deserialize, Serialize};

use crate::error::{ElvaError, Result};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.5758;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci99: (f64, f64),
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(ElvaError::Domain(format!(
                "need at least two samples for a confidence interval, got {n}"
            )));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std_error = (var / n as f64).sqrt();
        Ok(Self {
            mean,
            std_error,
            ci99: (mean - Z_99 * std_error, mean + Z_99 * std_error),
        })
    }

    pub fn half_width(&self) -> f64 {
        Z_99 * self.std_error
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci99.0 <= x && x <= self.ci99.1
    }
}

/// Normal-approximation 99% interval `mean ± z sd / sqrt(n)`.
pub fn confidence_interval(samples: &[f64]) -> Result<(f64, f64)> {
    Estimate::from_samples(samples).map(|e| e.ci99)
}
