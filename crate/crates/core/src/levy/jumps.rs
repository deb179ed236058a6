//! Discretization of the Lévy measure on the log-price grid.
//!
//! Jumps smaller than `eps` are replaced by a diffusion with variance rate
//! `sigma_eps_sq` and a drift `small_jump_drift`; jumps in `[eps, B]` become
//! a convolution stencil with one weight per grid offset; jumps beyond `B`
//! are dropped.

use super::LevyModel;
use crate::error::{ElvaError, Result};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone)]
pub struct JumpDiscretization {
    /// Intensities for offsets `-max_offset..=max_offset` (index `k + max_offset`).
    pub weights: Vec<f64>,
    pub max_offset: usize,
    /// `int_{|y|<eps} y^2 nu(dy)`.
    pub sigma_eps_sq: f64,
    /// `int_{|y|<eps} (1 + y - e^y) nu(dy)`.
    pub small_jump_drift: f64,
    /// Total intensity of the stencil.
    pub lambda_eps: f64,
    /// `sum_k w_k (e^{k dy} - 1)`, the compensator of the stencil.
    pub drift_comp: f64,
    pub eps: f64,
    pub bound: f64,
    pub dy: f64,
}

impl JumpDiscretization {
    pub fn weight(&self, offset: isize) -> f64 {
        let idx = offset + self.max_offset as isize;
        if idx < 0 || idx as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }

    /// Number of nonzero stencil entries.
    pub fn active_len(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }
}

fn multiple_of(x: f64, dy: f64) -> Option<usize> {
    let k = (x / dy).round();
    if k >= 0.0 && (x - k * dy).abs() <= 1e-9 * dy.max(x.abs()) {
        Some(k as usize)
    } else {
        None
    }
}

/// Discretizes the Lévy measure for grid step `dy`, small-jump cutoff `eps`
/// and truncation bound `bound`.
pub fn discretize_jumps(
    model: &LevyModel,
    dy: f64,
    eps: f64,
    bound: f64,
) -> Result<JumpDiscretization> {
    if !(dy > 0.0) {
        return Err(ElvaError::Geometry(format!("dy = {dy} must be positive")));
    }
    if !(eps > 0.0) || eps > bound {
        return Err(ElvaError::Geometry(format!(
            "need 0 < eps <= B, got eps = {eps}, B = {bound}"
        )));
    }
    let k_eps = multiple_of(eps, dy)
        .ok_or_else(|| ElvaError::Geometry(format!("eps = {eps} not a multiple of dy = {dy}")))?;
    let k_b = multiple_of(bound, dy)
        .ok_or_else(|| ElvaError::Geometry(format!("B = {bound} not a multiple of dy = {dy}")))?;

    let gl8 = GaussLegendre::new(8);
    let gl32 = GaussLegendre::new(32);
    let gl64 = GaussLegendre::new(64);
    let nu = |y: f64| model.density_unchecked(y);

    let mut weights = vec![0.0; 2 * k_b + 1];
    for k in k_eps..=k_b {
        let lo = eps.max((k as f64 - 0.5) * dy);
        let hi = bound.min((k as f64 + 0.5) * dy);
        if hi <= lo {
            continue;
        }
        let steep = k <= k_eps + 2;
        let (pos, neg) = if steep {
            let p64 = gl64.integrate(lo, hi, nu);
            let n64 = gl64.integrate(-hi, -lo, nu);
            if k == k_eps {
                let p32 = gl32.integrate(lo, hi, nu);
                let n32 = gl32.integrate(-hi, -lo, nu);
                let rel = ((p64 - p32).abs() + (n64 - n32).abs()) / (p64 + n64).max(1e-300);
                if rel > 1e-6 || !p64.is_finite() || !n64.is_finite() {
                    return Err(ElvaError::Quadrature(format!(
                        "cell next to eps did not converge (relative change {rel:e})"
                    )));
                }
            }
            (p64, n64)
        } else {
            (gl8.integrate(lo, hi, nu), gl8.integrate(-hi, -lo, nu))
        };
        weights[k_b + k] = pos;
        weights[k_b - k] = neg;
    }

    // Small jumps: substitute y = eps t^4 to tame the singularity at 0.
    let small = |g: &dyn Fn(f64) -> f64| -> f64 {
        gl64.integrate(0.0, 1.0, |t| {
            let t3 = t * t * t;
            let y = eps * t3 * t;
            let jac = 4.0 * eps * t3;
            if y == 0.0 {
                0.0
            } else {
                (g(y) * nu(y) + g(-y) * nu(-y)) * jac
            }
        })
    };
    let sigma_eps_sq = small(&|y| y * y);
    let small_jump_drift = small(&|y| -(y.exp_m1() - y));

    let lambda_eps: f64 = weights.iter().sum();
    let drift_comp: f64 = weights
        .iter()
        .enumerate()
        .map(|(idx, w)| w * ((idx as f64 - k_b as f64) * dy).exp_m1())
        .sum();

    if !sigma_eps_sq.is_finite() || !lambda_eps.is_finite() || !drift_comp.is_finite() {
        return Err(ElvaError::Quadrature(
            "non-finite jump moments".to_string(),
        ));
    }

    Ok(JumpDiscretization {
        weights,
        max_offset: k_b,
        sigma_eps_sq,
        small_jump_drift,
        lambda_eps,
        drift_comp,
        eps,
        bound,
        dy,
    })
}

/// Intensity of jumps with `|y| > bound`.
pub(crate) fn tail_intensity(model: &LevyModel, bound: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let (left, right) = model.tail_decay();
    let side = |rate: f64, sign: f64| {
        let width = match model {
            LevyModel::Mjd {
                mu_j, sigma_j, ..
            } => mu_j.abs() + 40.0 * sigma_j,
            _ => 60.0 / rate,
        };
        gl.integrate_composite(bound, bound + width, 128, |y| {
            model.density_unchecked(sign * y)
        })
    };
    side(right, 1.0) + side(left, -1.0)
}

/// Smallest cutoff `eps = k dy`, `k >= 1`, whose stencil intensity does not
/// exceed `max_intensity`.
pub fn stable_cutoff(model: &LevyModel, dy: f64, bound: f64, max_intensity: f64) -> Result<f64> {
    let kb = multiple_of(bound, dy)
        .ok_or_else(|| ElvaError::Geometry(format!("B = {bound} is not a multiple of dy = {dy}")))?;
    let intensity = |k: usize| -> Result<f64> {
        Ok(discretize_jumps(model, dy, k as f64 * dy, bound)?.lambda_eps)
    };
    if intensity(1)? <= max_intensity {
        return Ok(dy);
    }
    let (mut lo, mut hi) = (1usize, 2usize);
    while hi < kb && intensity(hi)? > max_intensity {
        lo = hi;
        hi = (2 * hi).min(kb);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if intensity(mid)? > max_intensity {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi as f64 * dy)
}

/// Smallest `B` (to bisection accuracy) with tail intensity below `tol`.
pub fn truncation_bound(model: &LevyModel, tol: f64) -> Result<f64> {
    let mut hi = 1.0;
    while tail_intensity(model, hi) > tol {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(ElvaError::Quadrature(
                "Lévy tail does not decay below tolerance".to_string(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && tail_intensity(model, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    Ok(hi)
}
