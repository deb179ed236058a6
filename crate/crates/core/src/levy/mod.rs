//! Exponential Lévy models for the fund: characteristic exponents, Lévy
//! densities, martingale correction, jump discretization for the PIDE and
//! increment samplers for simulation.

mod bessel;
mod jumps;
mod sampling;

pub use bessel::bessel_k1;
pub use jumps::{discretize_jumps, stable_cutoff, truncation_bound, JumpDiscretization};
pub use sampling::IncrementSampler;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{ElvaError, Result};

/// Parameter sets of the supported Lévy processes.
///
/// The characteristic exponent `psi` is defined by `E[exp(i xi X_t)] =
/// exp(-t psi(xi))`. The closed forms returned by
/// [`LevyModel::char_exponent`] carry no martingale drift; see
/// [`LevyModel::martingale_correction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum LevyModel {
    Nig { alpha: f64, beta: f64, delta: f64 },
    Vg { kappa: f64, theta: f64, sigma: f64 },
    Cgmy { c: f64, g: f64, m: f64, y: f64 },
    Mjd { sigma: f64, lambda: f64, mu_j: f64, sigma_j: f64 },
}

impl LevyModel {
    pub fn nig(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        Self::Nig { alpha, beta, delta }.validated()
    }

    pub fn vg(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        Self::Vg { kappa, theta, sigma }.validated()
    }

    pub fn cgmy(c: f64, g: f64, m: f64, y: f64) -> Result<Self> {
        Self::Cgmy { c, g, m, y }.validated()
    }

    pub fn mjd(sigma: f64, lambda: f64, mu_j: f64, sigma_j: f64) -> Result<Self> {
        Self::Mjd {
            sigma,
            lambda,
            mu_j,
            sigma_j,
        }
        .validated()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Nig { .. } => "NIG",
            Self::Vg { .. } => "VG",
            Self::Cgmy { .. } => "CGMY",
            Self::Mjd { .. } => "MJD",
        }
    }

    /// Checks parameter domains and existence of the exponential moment.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ElvaError::invalid(name, "must be finite"))
            }
        };
        match *self {
            Self::Nig { alpha, beta, delta } => {
                finite("alpha", alpha)?;
                finite("beta", beta)?;
                finite("delta", delta)?;
                if alpha <= 0.0 {
                    return Err(ElvaError::invalid("alpha", "NIG requires alpha > 0"));
                }
                if beta.abs() >= alpha {
                    return Err(ElvaError::invalid("beta", "NIG requires |beta| < alpha"));
                }
                if delta <= 0.0 {
                    return Err(ElvaError::invalid("delta", "NIG requires delta > 0"));
                }
                if (beta + 1.0).abs() >= alpha {
                    return Err(ElvaError::invalid(
                        "beta",
                        "NIG exponential moment requires |beta + 1| < alpha",
                    ));
                }
            }
            Self::Vg {
                kappa,
                theta,
                sigma,
            } => {
                finite("kappa", kappa)?;
                finite("theta", theta)?;
                finite("sigma", sigma)?;
                if kappa <= 0.0 {
                    return Err(ElvaError::invalid("kappa", "VG requires kappa > 0"));
                }
                if sigma <= 0.0 {
                    return Err(ElvaError::invalid("sigma", "VG requires sigma > 0"));
                }
                if 1.0 - theta * kappa - 0.5 * kappa * sigma * sigma <= 0.0 {
                    return Err(ElvaError::invalid(
                        "theta",
                        "VG exponential moment requires 1 - theta*kappa - kappa*sigma^2/2 > 0",
                    ));
                }
            }
            Self::Cgmy { c, g, m, y } => {
                finite("C", c)?;
                finite("G", g)?;
                finite("M", m)?;
                finite("Y", y)?;
                if c <= 0.0 {
                    return Err(ElvaError::invalid("C", "CGMY requires C > 0"));
                }
                if g <= 0.0 {
                    return Err(ElvaError::invalid("G", "CGMY requires G > 0"));
                }
                if m <= 1.0 {
                    return Err(ElvaError::invalid(
                        "M",
                        "CGMY exponential moment requires M > 1",
                    ));
                }
                if y >= 2.0 {
                    return Err(ElvaError::invalid("Y", "CGMY requires Y < 2"));
                }
                if y == 0.0 || y == 1.0 {
                    return Err(ElvaError::invalid(
                        "Y",
                        "CGMY exponent form undefined at integer Y (Gamma(-Y) pole)",
                    ));
                }
            }
            Self::Mjd {
                sigma,
                lambda,
                mu_j,
                sigma_j,
            } => {
                finite("sigma", sigma)?;
                finite("lambda", lambda)?;
                finite("mu_j", mu_j)?;
                finite("sigma_j", sigma_j)?;
                if sigma < 0.0 {
                    return Err(ElvaError::invalid("sigma", "MJD requires sigma >= 0"));
                }
                if lambda < 0.0 {
                    return Err(ElvaError::invalid("lambda", "MJD requires lambda >= 0"));
                }
                if sigma_j <= 0.0 {
                    return Err(ElvaError::invalid("sigma_j", "MJD requires sigma_j > 0"));
                }
            }
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Volatility of the Brownian component (zero for pure-jump models).
    pub fn gaussian_sigma(&self) -> f64 {
        match *self {
            Self::Mjd { sigma, .. } => sigma,
            _ => 0.0,
        }
    }

    fn check_strip(&self, xi: Complex64) -> Result<()> {
        let b = xi.im;
        if !(-1.0..=0.0).contains(&b) {
            return Err(ElvaError::Domain(format!(
                "Im(xi) = {b} outside [-1, 0]"
            )));
        }
        let ok = match *self {
            Self::Nig { alpha, beta, .. } => (beta - b).abs() < alpha,
            Self::Vg {
                kappa,
                theta,
                sigma,
            } => {
                let eta = -b;
                1.0 - theta * kappa * eta - 0.5 * kappa * sigma * sigma * eta * eta > 0.0
            }
            Self::Cgmy { g, m, .. } => g - b > 0.0 && m + b > 0.0,
            Self::Mjd { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(ElvaError::Domain(format!(
                "xi = {xi} outside the analyticity strip of {}",
                self.name()
            )))
        }
    }

    /// Base characteristic exponent (no martingale drift).
    pub fn char_exponent(&self, xi: Complex64) -> Result<Complex64> {
        self.check_strip(xi)?;
        Ok(self.char_exponent_unchecked(xi))
    }

    pub(crate) fn char_exponent_unchecked(&self, xi: Complex64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            Self::Nig { alpha, beta, delta } => {
                let a2 = Complex64::from(alpha * alpha);
                let bx = beta + i * xi;
                delta * ((a2 - bx * bx).sqrt() - (alpha * alpha - beta * beta).sqrt())
            }
            Self::Vg {
                kappa,
                theta,
                sigma,
            } => {
                // Standard VG sign: Re psi >= 0 on the real line.
                let arg = 1.0 - i * xi * theta * kappa + 0.5 * kappa * sigma * sigma * xi * xi;
                arg.ln() / kappa
            }
            Self::Cgmy { c, g, m, y } => {
                let gp = (Complex64::from(g) + i * xi).powf(y);
                let mp = (Complex64::from(m) - i * xi).powf(y);
                c * gamma(-y) * (g.powf(y) - gp + m.powf(y) - mp)
            }
            Self::Mjd {
                sigma,
                lambda,
                mu_j,
                sigma_j,
            } => {
                let sx = sigma * xi;
                let jx = sigma_j * xi;
                0.5 * sx * sx - lambda * ((i * mu_j * xi - 0.5 * jx * jx).exp() - 1.0)
            }
        }
    }

    /// Drift `mu_c = psi_base(-i)`: adding `mu_c * t` to `X_t` makes `exp(X_t)`
    /// a martingale.
    pub fn martingale_correction(&self) -> Result<f64> {
        Ok(self.char_exponent(-Complex64::i())?.re)
    }

    /// Exponent of the martingale-corrected process `X_t + mu_c t`.
    pub fn char_exponent_corrected(&self, xi: Complex64) -> Result<Complex64> {
        let mu_c = self.martingale_correction()?;
        Ok(self.char_exponent(xi)? - Complex64::i() * mu_c * xi)
    }

    /// Lévy density `nu(y)`.
    pub fn levy_density(&self, y: f64) -> Result<f64> {
        if y == 0.0 || !y.is_finite() {
            return Err(ElvaError::Domain(format!(
                "Lévy density undefined at y = {y}"
            )));
        }
        Ok(self.density_unchecked(y))
    }

    pub(crate) fn density_unchecked(&self, y: f64) -> f64 {
        let ay = y.abs();
        match *self {
            Self::Nig { alpha, beta, delta } => {
                delta * alpha / PI * (beta * y).exp() * bessel_k1(alpha * ay) / ay
            }
            Self::Vg {
                kappa,
                theta,
                sigma,
            } => {
                let s2 = sigma * sigma;
                let a = theta / s2;
                let b = (theta * theta + 2.0 * s2 / kappa).sqrt() / s2;
                (a * y - b * ay).exp() / (kappa * ay)
            }
            Self::Cgmy { c, g, m, y: fy } => {
                let decay = if y < 0.0 { g } else { m };
                c * (-decay * ay).exp() / ay.powf(1.0 + fy)
            }
            Self::Mjd {
                lambda,
                mu_j,
                sigma_j,
                ..
            } => {
                let z = (y - mu_j) / sigma_j;
                lambda * (-0.5 * z * z).exp() / (sigma_j * (2.0 * PI).sqrt())
            }
        }
    }

    /// Exponential decay rates of the Lévy density tails, `(left, right)`.
    pub(crate) fn tail_decay(&self) -> (f64, f64) {
        match *self {
            Self::Nig { alpha, beta, .. } => (alpha + beta, alpha - beta),
            Self::Vg {
                kappa,
                theta,
                sigma,
            } => {
                let s2 = sigma * sigma;
                let a = theta / s2;
                let b = (theta * theta + 2.0 * s2 / kappa).sqrt() / s2;
                (b + a, b - a)
            }
            Self::Cgmy { g, m, .. } => (g, m),
            Self::Mjd { sigma_j, .. } => (1.0 / sigma_j, 1.0 / sigma_j),
        }
    }

    /// `E[X_1]` of the uncorrected process.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Nig { alpha, beta, delta } => delta * beta / (alpha * alpha - beta * beta).sqrt(),
            Self::Vg { theta, .. } => theta,
            Self::Cgmy { c, g, m, y } => c * gamma(1.0 - y) * (m.powf(y - 1.0) - g.powf(y - 1.0)),
            Self::Mjd { lambda, mu_j, .. } => lambda * mu_j,
        }
    }

    /// `Var[X_1]`, equal to `psi''(0)`.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Nig { alpha, beta, delta } => {
                delta * alpha * alpha / (alpha * alpha - beta * beta).powf(1.5)
            }
            Self::Vg {
                kappa,
                theta,
                sigma,
            } => sigma * sigma + theta * theta * kappa,
            Self::Cgmy { c, g, m, y } => c * gamma(2.0 - y) * (m.powf(y - 2.0) + g.powf(y - 2.0)),
            Self::Mjd {
                sigma,
                lambda,
                mu_j,
                sigma_j,
            } => sigma * sigma + lambda * (mu_j * mu_j + sigma_j * sigma_j),
        }
    }

    /// Whether the jump part has finite total intensity.
    pub fn finite_activity(&self) -> bool {
        matches!(self, Self::Mjd { .. })
    }
}
