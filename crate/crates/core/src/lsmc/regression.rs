//! Least-squares fit of a complete bivariate polynomial of total degree `d`,
//! expressed in tensor Legendre polynomials of the inputs rescaled to
//! `[-1, 1]^2`. The basis is ordered by total degree, so the basis of degree
//! `d` is a prefix of the basis of degree `d + 1` and one Gram matrix at the
//! largest degree serves every candidate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MAX_DEGREE: usize = 8;

/// Share of a sector's points used for fitting during degree selection.
pub const TRAIN_SHARE: f64 = 0.8;

pub const fn basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Affine map of `[lo, hi]` onto `[-1, 1]`; a degenerate range maps to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub centre: f64,
    pub half_range: f64,
}

impl Scaling {
    pub fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !(hi > lo) {
            return Self {
                centre: if lo.is_finite() { lo } else { 0.0 },
                half_range: 0.0,
            };
        }
        Self {
            centre: 0.5 * (lo + hi),
            half_range: 0.5 * (hi - lo),
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.half_range > 0.0 {
            (v - self.centre) / self.half_range
        } else {
            0.0
        }
    }
}

fn legendre(x: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = x;
    }
    for n in 1..degree {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Writes the `basis_len(degree)` basis values at scaled `(x, y)` into `out`.
pub fn basis(x: f64, y: f64, degree: usize, out: &mut [f64]) {
    let mut px = [0.0; MAX_DEGREE + 1];
    let mut py = [0.0; MAX_DEGREE + 1];
    legendre(x, degree, &mut px);
    legendre(y, degree, &mut py);
    let mut k = 0;
    for d in 0..=degree {
        for j in 0..=d {
            out[k] = px[d - j] * py[j];
            k += 1;
        }
    }
}

/// Normal equations accumulated at a fixed maximum degree.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    size: usize,
    /// Upper triangle, row-major `size x size`.
    gram: Vec<f64>,
    rhs: Vec<f64>,
    yy: f64,
    count: usize,
}

impl NormalEquations {
    pub fn new(degree: usize) -> Self {
        let size = basis_len(degree);
        Self {
            size,
            gram: vec![0.0; size * size],
            rhs: vec![0.0; size],
            yy: 0.0,
            count: 0,
        }
    }

    pub fn add(&mut self, phi: &[f64], y: f64) {
        let n = self.size;
        for a in 0..n {
            let pa = phi[a];
            if pa == 0.0 {
                continue;
            }
            let row = &mut self.gram[a * n..(a + 1) * n];
            for b in a..n {
                row[b] += pa * phi[b];
            }
            self.rhs[a] += pa * y;
        }
        self.yy += y * y;
        self.count += 1;
    }

    pub fn merged(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.gram.iter_mut().zip(&other.gram) {
            *a += b;
        }
        for (a, b) in out.rhs.iter_mut().zip(&other.rhs) {
            *a += b;
        }
        out.yy += other.yy;
        out.count += other.count;
        out
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Least-squares coefficients on the first `basis_len(degree)` functions,
    /// or `None` when the leading block is numerically singular.
    pub fn solve(&self, degree: usize) -> Option<Vec<f64>> {
        let p = basis_len(degree);
        if p > self.size || self.count < p {
            return None;
        }
        let n = self.size;
        let g = |a: usize, b: usize| {
            if a <= b {
                self.gram[a * n + b]
            } else {
                self.gram[b * n + a]
            }
        };
        let max_diag = (0..p).map(|a| g(a, a)).fold(0.0, f64::max);
        if !(max_diag > 0.0) {
            return None;
        }
        let tol = 1e-12 * max_diag;
        // lower Cholesky factor, row-major p x p
        let mut l = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let mut s = g(i, j);
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                if i == j {
                    if !(s > tol) {
                        return None;
                    }
                    l[i * p + i] = s.sqrt();
                } else {
                    l[i * p + j] = s / l[j * p + j];
                }
            }
        }
        let mut z = self.rhs[..p].to_vec();
        for i in 0..p {
            for k in 0..i {
                z[i] -= l[i * p + k] * z[k];
            }
            z[i] /= l[i * p + i];
        }
        for i in (0..p).rev() {
            for k in i + 1..p {
                z[i] -= l[k * p + i] * z[k];
            }
            z[i] /= l[i * p + i];
        }
        z.iter().all(|c| c.is_finite()).then_some(z)
    }

    /// Mean squared residual of `coeffs` over the accumulated points.
    pub fn mse(&self, coeffs: &[f64]) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        let n = self.size;
        let p = coeffs.len();
        let mut quad = 0.0;
        for a in 0..p {
            let mut s = self.gram[a * n + a] * coeffs[a];
            for b in a + 1..p {
                s += 2.0 * self.gram[a * n + b] * coeffs[b];
            }
            quad += coeffs[a] * s;
        }
        let cross: f64 = coeffs.iter().zip(&self.rhs).map(|(c, b)| c * b).sum();
        ((self.yy - 2.0 * cross + quad) / self.count as f64).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeTrial {
    pub degree: usize,
    pub train_mse: f64,
    pub test_mse: f64,
}

/// Polynomial continuation estimate of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorFit {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub fund_scaling: Scaling,
    pub rate_scaling: Scaling,
    /// Number of points the fit was estimated from.
    pub points: usize,
    pub trials: Vec<DegreeTrial>,
}

impl SectorFit {
    pub fn constant(value: f64) -> Self {
        Self {
            degree: 0,
            coefficients: vec![value],
            fund_scaling: Scaling {
                centre: 0.0,
                half_range: 0.0,
            },
            rate_scaling: Scaling {
                centre: 0.0,
                half_range: 0.0,
            },
            points: 0,
            trials: Vec::new(),
        }
    }

    pub fn evaluate(&self, fund: f64, rate: f64) -> f64 {
        let mut phi = [0.0; basis_len(MAX_DEGREE)];
        let p = self.coefficients.len();
        basis(
            self.fund_scaling.apply(fund),
            self.rate_scaling.apply(rate),
            self.degree,
            &mut phi[..p],
        );
        phi[..p].iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }
}

/// How the polynomial degree of a sector is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegreeRule {
    /// Raise the degree from 0 while the held-out error strictly decreases.
    Select { max_degree: usize, seed: u64, stream: u64 },
    Fixed(usize),
}

/// Fits `y` against `(fund, rate)` over the listed points.
pub fn fit_sector(points: &[usize], fund: &[f64], rate: &[f64], y: &[f64], rule: DegreeRule) -> SectorFit {
    let fund_scaling = Scaling::fit(points.iter().map(|&k| fund[k]));
    let rate_scaling = Scaling::fit(points.iter().map(|&k| rate[k]));
    let top = match rule {
        DegreeRule::Select { max_degree, .. } => max_degree,
        DegreeRule::Fixed(d) => d,
    }
    .min(MAX_DEGREE);

    let mut order = points.to_vec();
    let n_train = match rule {
        DegreeRule::Select { seed, stream, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            order.shuffle(&mut rng);
            ((TRAIN_SHARE * order.len() as f64).round() as usize).max(1)
        }
        DegreeRule::Fixed(_) => order.len(),
    };

    let mut train = NormalEquations::new(top);
    let mut test = NormalEquations::new(top);
    let mut phi = vec![0.0; basis_len(top)];
    for (i, &k) in order.iter().enumerate() {
        basis(fund_scaling.apply(fund[k]), rate_scaling.apply(rate[k]), top, &mut phi);
        if i < n_train {
            train.add(&phi, y[k]);
        } else {
            test.add(&phi, y[k]);
        }
    }

    let mut trials = Vec::new();
    let mut chosen = 0;
    match rule {
        DegreeRule::Fixed(d) => chosen = d.min(MAX_DEGREE),
        DegreeRule::Select { .. } if test.count() > 0 => {
            let mut best = f64::INFINITY;
            for d in 0..=top {
                let Some(c) = train.solve(d) else { break };
                let trial = DegreeTrial {
                    degree: d,
                    train_mse: train.mse(&c),
                    test_mse: test.mse(&c),
                };
                trials.push(trial);
                if trial.test_mse < best {
                    best = trial.test_mse;
                    chosen = d;
                } else {
                    break;
                }
            }
        }
        DegreeRule::Select { .. } => {}
    }

    let all = train.merged(&test);
    let (degree, coefficients) = (0..=chosen)
        .rev()
        .find_map(|d| all.solve(d).map(|c| (d, c)))
        .unwrap_or_else(|| {
            let mean = points.iter().map(|&k| y[k]).sum::<f64>() / points.len().max(1) as f64;
            (0, vec![mean])
        });
    SectorFit {
        degree,
        coefficients,
        fund_scaling,
        rate_scaling,
        points: points.len(),
        trials,
    }
}
