//! Hull-White short rate `r_t = sigma R_t + beta(t)` where `R` is a
//! unit-volatility Ornstein-Uhlenbeck factor started at zero and `beta`
//! fits the initial discount curve.

mod curve;
mod simulate;
mod tree;

pub use curve::DiscountCurve;
pub use simulate::{sample_rate_paths, OuIntervalSampler, RatePaths};
pub(crate) use simulate::RateStepper;
pub use tree::{RateTree, TreeLevel, DEFAULT_MAX_TREE_STEPS};

use serde::{Deserialize, Serialize};

use crate::error::{ElvaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullWhiteParams {
    /// Mean-reversion speed.
    pub k: f64,
    /// Short-rate volatility.
    pub sigma: f64,
    pub r0: f64,
    pub curve: DiscountCurve,
}

impl HullWhiteParams {
    /// Parameters on the flat curve `P(0, T) = exp(-r0 T)`.
    pub fn flat(k: f64, sigma: f64, r0: f64) -> Result<Self> {
        let p = Self {
            k,
            sigma,
            r0,
            curve: DiscountCurve::Flat { rate: r0 },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(ElvaError::invalid("k_hw", "mean reversion must be positive"));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(ElvaError::invalid("sigma_hw", "rate volatility must be positive"));
        }
        if !self.r0.is_finite() {
            return Err(ElvaError::invalid("r0", "must be finite"));
        }
        Ok(())
    }

    fn convexity(&self, t: f64) -> f64 {
        let k = self.k;
        let e = -(-k * t).exp_m1();
        self.sigma * self.sigma / (2.0 * k * k) * e * e
    }

    /// Deterministic shift `beta(t) = f(0, t) + sigma^2/(2k^2) (1 - e^{-kt})^2`.
    pub fn beta(&self, t: f64) -> f64 {
        self.curve.forward(t) + self.convexity(t)
    }

    /// Drift target `theta_t` of the flat-curve model.
    pub fn theta(&self, t: f64) -> Result<f64> {
        match self.curve {
            DiscountCurve::Flat { rate } => {
                let k = self.k;
                Ok(rate - self.sigma * self.sigma / (2.0 * k * k) * (-2.0 * k * t).exp_m1())
            }
            DiscountCurve::Tabulated { .. } => Err(ElvaError::UnsupportedCurve(
                "theta is only available for the flat curve".to_string(),
            )),
        }
    }

    /// `int_a^b beta(t) dt`.
    pub fn beta_integral(&self, a: f64, b: f64) -> f64 {
        let k = self.k;
        let ea = (-k * a).exp();
        let eb = (-k * b).exp();
        let conv = self.sigma * self.sigma / (2.0 * k * k)
            * ((b - a) + 2.0 * (eb - ea) / k - (eb * eb - ea * ea) / (2.0 * k));
        self.curve.log_discount(a) - self.curve.log_discount(b) + conv
    }

    /// `Var[int_0^t R_s ds]` for the unit OU factor started at zero.
    pub fn integrated_factor_variance(&self, t: f64) -> f64 {
        let k = self.k;
        (t - 2.0 * (-(-k * t).exp_m1()) / k + (-(-2.0 * k * t).exp_m1()) / (2.0 * k)) / (k * k)
    }
}
