//! Exact simulation of the short rate and its time integral at anniversaries.

use rand::Rng;
use rand_distr::StandardNormal;

use super::HullWhiteParams;

/// Exact Gaussian transition of `(R_h, int_0^h R ds)` given `R_0` for the
/// unit-volatility OU factor with mean reversion `k`.
#[derive(Debug, Clone, Copy)]
pub struct OuIntervalSampler {
    decay: f64,
    integral_loading: f64,
    chol_rr: f64,
    chol_ir: f64,
    chol_ii: f64,
}

impl OuIntervalSampler {
    pub fn new(k: f64, h: f64) -> Self {
        let decay = (-k * h).exp();
        let one_minus = -(-k * h).exp_m1();
        let var_r = -(-2.0 * k * h).exp_m1() / (2.0 * k);
        let var_i = (h - 2.0 * one_minus / k + var_r) / (k * k);
        let cov = one_minus * one_minus / (2.0 * k * k);
        let chol_rr = var_r.sqrt();
        let chol_ir = cov / chol_rr;
        let chol_ii = (var_i - chol_ir * chol_ir).max(0.0).sqrt();
        Self {
            decay,
            integral_loading: one_minus / k,
            chol_rr,
            chol_ir,
            chol_ii,
        }
    }

    /// Returns `(R_h, int_0^h R ds)`.
    pub fn step<R: Rng + ?Sized>(&self, r0: f64, rng: &mut R) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let r = r0 * self.decay + self.chol_rr * z1;
        let i = r0 * self.integral_loading + self.chol_ir * z1 + self.chol_ii * z2;
        (r, i)
    }
}

/// Short rates `r[m][k]` and integrals `integral[m][k] = int_0^m r` at
/// anniversaries `m = 0..=years`.
#[derive(Debug, Clone)]
pub struct RatePaths {
    pub rate: Vec<Vec<f64>>,
    pub integral: Vec<Vec<f64>>,
}

/// Per-year generator of `(r_{m+1}, int_m^{m+1} r)` along one path.
#[derive(Debug, Clone)]
pub(crate) struct RateStepper {
    sampler: OuIntervalSampler,
    sigma: f64,
    beta_at: Vec<f64>,
    beta_int: Vec<f64>,
}

impl RateStepper {
    pub(crate) fn new(params: &HullWhiteParams, years: usize) -> Self {
        Self {
            sampler: OuIntervalSampler::new(params.k, 1.0),
            sigma: params.sigma,
            beta_at: (0..=years).map(|m| params.beta(m as f64)).collect(),
            beta_int: (0..years)
                .map(|m| params.beta_integral(m as f64, m as f64 + 1.0))
                .collect(),
        }
    }

    /// Advances the factor from anniversary `m`; returns the new factor, the
    /// short rate at `m + 1` and the rate integral over `[m, m + 1]`.
    pub(crate) fn step<R: Rng + ?Sized>(&self, m: usize, factor: f64, rng: &mut R) -> (f64, f64, f64) {
        let (f, fi) = self.sampler.step(factor, rng);
        (
            f,
            self.sigma * f + self.beta_at[m + 1],
            self.sigma * fi + self.beta_int[m],
        )
    }

    pub(crate) fn initial_rate(&self) -> f64 {
        self.beta_at[0]
    }
}

pub fn sample_rate_paths<R: Rng + ?Sized>(
    params: &HullWhiteParams,
    years: usize,
    n_paths: usize,
    rng: &mut R,
) -> RatePaths {
    let stepper = RateStepper::new(params, years);
    let mut rate = vec![vec![0.0; n_paths]; years + 1];
    let mut integral = vec![vec![0.0; n_paths]; years + 1];
    for k in 0..n_paths {
        let mut factor = 0.0;
        rate[0][k] = stepper.initial_rate();
        for m in 0..years {
            let (f, r, di) = stepper.step(m, factor, rng);
            factor = f;
            rate[m + 1][k] = r;
            integral[m + 1][k] = integral[m][k] + di;
        }
    }
    RatePaths { rate, integral }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn rate_moments() {
        let p = HullWhiteParams::flat(0.2, 0.03, 0.02).unwrap();
        let n = 200_000;
        let paths = sample_rate_paths(&p, 25, n, &mut ChaCha8Rng::seed_from_u64(11));
        for m in [1usize, 5, 25] {
            let (mean, sd) = mean_sd(&paths.rate[m]);
            assert!((mean - p.beta(m as f64)).abs() < 4.0 * sd / (n as f64).sqrt());
            let exact_var = p.sigma * p.sigma * -(-2.0 * p.k * m as f64).exp_m1() / (2.0 * p.k);
            // sd of the sample variance for a Gaussian is var * sqrt(2/(n-1))
            let se_var = exact_var * (2.0 / (n as f64 - 1.0)).sqrt();
            assert!((sd * sd - exact_var).abs() < 4.0 * se_var, "m={m}");
        }
    }

    #[test]
    fn integral_moments_match_closed_form() {
        let p = HullWhiteParams::flat(0.3, 0.02, 0.01).unwrap();
        let n = 100_000;
        let paths = sample_rate_paths(&p, 3, n, &mut ChaCha8Rng::seed_from_u64(5));
        let (mean, sd) = mean_sd(&paths.integral[3]);
        assert!((mean - p.beta_integral(0.0, 3.0)).abs() < 4.0 * sd / (n as f64).sqrt());
        let exact_var = p.sigma * p.sigma * p.integrated_factor_variance(3.0);
        assert!((sd * sd - exact_var).abs() < 4.0 * exact_var * (2.0 / n as f64).sqrt());
    }
}
