//! Exact-in-law samplers for Lévy increments over a fixed step.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian, Poisson, StandardNormal};
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::LevyModel;
use crate::error::{ElvaError, Result};

/// Draws increments `X_{t+dt} - X_t` of the uncorrected process.
#[derive(Debug, Clone)]
pub enum IncrementSampler {
    Nig {
        beta: f64,
        subordinator: InverseGaussian<f64>,
    },
    Vg {
        theta: f64,
        sigma: f64,
        subordinator: Gamma<f64>,
    },
    Mjd {
        diffusion_sd: f64,
        jumps: Option<Poisson<f64>>,
        mu_j: f64,
        sigma_j: f64,
    },
    /// Inverse-transform sampling from a tabulated CDF.
    Tabulated { x: Vec<f64>, cdf: Vec<f64> },
}

impl IncrementSampler {
    pub fn new(model: &LevyModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(ElvaError::invalid("dt", "increment step must be positive"));
        }
        model.validate()?;
        let distr_err = |e: &dyn std::fmt::Display| ElvaError::invalid("sampler", e.to_string());
        Ok(match *model {
            LevyModel::Nig { alpha, beta, delta } => {
                let gamma = (alpha * alpha - beta * beta).sqrt();
                let d = delta * dt;
                Self::Nig {
                    beta,
                    subordinator: InverseGaussian::new(d / gamma, d * d)
                        .map_err(|e| distr_err(&e))?,
                }
            }
            LevyModel::Vg {
                kappa,
                theta,
                sigma,
            } => Self::Vg {
                theta,
                sigma,
                subordinator: Gamma::new(dt / kappa, kappa).map_err(|e| distr_err(&e))?,
            },
            LevyModel::Mjd {
                sigma,
                lambda,
                mu_j,
                sigma_j,
            } => Self::Mjd {
                diffusion_sd: sigma * dt.sqrt(),
                jumps: if lambda > 0.0 {
                    Some(Poisson::new(lambda * dt).map_err(|e| distr_err(&e))?)
                } else {
                    None
                },
                mu_j,
                sigma_j,
            },
            LevyModel::Cgmy { .. } => tabulate_cdf(model, dt)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Nig { beta, subordinator } => {
                let z = subordinator.sample(rng);
                let n: f64 = rng.sample(StandardNormal);
                beta * z + z.sqrt() * n
            }
            Self::Vg {
                theta,
                sigma,
                subordinator,
            } => {
                let g = subordinator.sample(rng);
                let n: f64 = rng.sample(StandardNormal);
                theta * g + sigma * g.sqrt() * n
            }
            Self::Mjd {
                diffusion_sd,
                jumps,
                mu_j,
                sigma_j,
            } => {
                let n: f64 = rng.sample(StandardNormal);
                let mut x = diffusion_sd * n;
                if let Some(p) = jumps {
                    let count = p.sample(rng);
                    if count > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        x += count * mu_j + sigma_j * count.sqrt() * z;
                    }
                }
                x
            }
            Self::Tabulated { x, cdf } => {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|c| *c < u);
                if idx == 0 {
                    x[0]
                } else if idx >= cdf.len() {
                    x[x.len() - 1]
                } else {
                    let (c0, c1) = (cdf[idx - 1], cdf[idx]);
                    let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                    x[idx - 1] + w * (x[idx] - x[idx - 1])
                }
            }
        }
    }
}

/// Tabulates the CDF of `X_dt` by FFT inversion of `exp(-dt psi)`.
fn tabulate_cdf(model: &LevyModel, dt: f64) -> Result<IncrementSampler> {
    let mean = model.mean() * dt;
    let sd = (model.variance() * dt).sqrt();
    let (left, right) = model.tail_decay();
    let half_width = (15.0 * sd).max(30.0 / left.min(right));
    let dx_target = sd / 400.0;
    let n = ((2.0 * half_width / dx_target).ceil() as usize)
        .next_power_of_two()
        .clamp(1 << 12, 1 << 20);
    let dx = 2.0 * half_width / n as f64;
    let x0 = mean - half_width;
    let du = 2.0 * PI / (n as f64 * dx);

    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let u = (k as f64 - (n / 2) as f64) * du;
            let phi = (-dt * model.char_exponent_unchecked(Complex64::new(u, 0.0))).exp();
            phi * Complex64::from_polar(1.0, -u * x0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = du / (2.0 * PI);
    let density: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (sign * c.re * scale).max(0.0)
        })
        .collect();

    let x: Vec<f64> = (0..n).map(|j| x0 + j as f64 * dx).collect();
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    cdf.push(0.0);
    for j in 1..n {
        acc += 0.5 * (density[j - 1] + density[j]) * dx;
        cdf.push(acc);
    }
    if !(acc > 0.0) || !acc.is_finite() {
        return Err(ElvaError::Numerical(
            "CDF tabulation produced no mass".to_string(),
        ));
    }
    for c in &mut cdf {
        *c /= acc;
    }
    Ok(IncrementSampler::Tabulated { x, cdf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_draws() {
        let m = LevyModel::nig(6.0, -0.4, 2.0).unwrap();
        let s = IncrementSampler::new(&m, 1.0).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(s.sample(&mut a).to_bits(), s.sample(&mut b).to_bits());
        }
    }

    #[test]
    fn cgmy_table_reproduces_moments() {
        let m = LevyModel::cgmy(0.02, 5.0, 15.0, 1.2).unwrap();
        let IncrementSampler::Tabulated { x, cdf } = IncrementSampler::new(&m, 1.0).unwrap() else {
            panic!("expected tabulated sampler");
        };
        let mut mean = 0.0;
        let mut second = 0.0;
        for j in 1..x.len() {
            let p = cdf[j] - cdf[j - 1];
            let xm = 0.5 * (x[j] + x[j - 1]);
            mean += p * xm;
            second += p * xm * xm;
        }
        let var = second - mean * mean;
        assert!((mean - m.mean()).abs() < 1e-5, "{mean} vs {}", m.mean());
        assert!((var - m.variance()).abs() / m.variance() < 1e-3);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let m = LevyModel::vg(0.85, 0.0, 0.2).unwrap();
        assert!(IncrementSampler::new(&m, 0.0).is_err());
    }
}
