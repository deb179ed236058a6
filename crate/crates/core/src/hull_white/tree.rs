//! Recombining multiple-jumps binomial lattice for the OU factor `R`.
//!
//! Level `n` holds nodes `R_j^n = (2j - n) sqrt(dt)`, `j = 0..=n`. From each
//! node the process moves to the nearest nodes of level `n + 1` that bracket
//! the one-step conditional mean `R (1 - k dt)`, possibly skipping several
//! nodes when the drift is large.

use super::HullWhiteParams;
use crate::error::{ElvaError, Result};

pub const DEFAULT_MAX_TREE_STEPS: usize = 20_000;

#[derive(Debug, Clone)]
pub struct TreeLevel {
    /// Up-jump target index at level `n + 1`.
    pub up: Vec<u32>,
    /// Down-jump target index at level `n + 1`.
    pub down: Vec<u32>,
    pub p_up: Vec<f64>,
    /// Short rate `sigma R_j^n + beta(n dt)`.
    pub rate: Vec<f64>,
    /// Whether the node is hit with positive probability from the root.
    pub reachable: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct RateTree {
    pub dt: f64,
    pub steps_per_year: usize,
    pub n_steps: usize,
    pub levels: Vec<TreeLevel>,
    sqrt_dt: f64,
}

impl RateTree {
    pub fn build(params: &HullWhiteParams, years: usize, steps_per_year: usize) -> Result<Self> {
        Self::build_with_limit(params, years, steps_per_year, DEFAULT_MAX_TREE_STEPS)
    }

    pub fn build_with_limit(
        params: &HullWhiteParams,
        years: usize,
        steps_per_year: usize,
        max_steps: usize,
    ) -> Result<Self> {
        params.validate()?;
        if years == 0 {
            return Err(ElvaError::invalid("M", "maturity must be at least one year"));
        }
        if steps_per_year == 0 {
            return Err(ElvaError::invalid("N_T", "need at least one step per year"));
        }
        let n_steps = years
            .checked_mul(steps_per_year)
            .ok_or(ElvaError::SizeLimit {
                size: usize::MAX,
                max: max_steps,
            })?;
        if n_steps > max_steps {
            return Err(ElvaError::SizeLimit {
                size: n_steps,
                max: max_steps,
            });
        }
        let dt = 1.0 / steps_per_year as f64;
        let sqrt_dt = dt.sqrt();
        let node = |n: usize, j: usize| (2.0 * j as f64 - n as f64) * sqrt_dt;

        let mut levels = Vec::with_capacity(n_steps + 1);
        for n in 0..=n_steps {
            let beta = params.beta(n as f64 * dt);
            let width = n + 1;
            let mut up = vec![0u32; width];
            let mut down = vec![0u32; width];
            let mut p_up = vec![0.0; width];
            let rate: Vec<f64> = (0..width)
                .map(|j| params.sigma * node(n, j) + beta)
                .collect();
            if n < n_steps {
                for j in 0..width {
                    let r = node(n, j);
                    let target = r - params.k * r * dt;
                    let (ju, jd) = jump_targets(n, j, target, &node);
                    let hi = node(n + 1, ju);
                    let lo = node(n + 1, jd);
                    up[j] = ju as u32;
                    down[j] = jd as u32;
                    p_up[j] = ((target - lo) / (hi - lo)).clamp(0.0, 1.0);
                }
            }
            levels.push(TreeLevel {
                up,
                down,
                p_up,
                rate,
                reachable: vec![false; width],
            });
        }

        levels[0].reachable[0] = true;
        for n in 0..n_steps {
            let (cur, next) = levels.split_at_mut(n + 1);
            let cur = &cur[n];
            let next = &mut next[0];
            for j in 0..=n {
                if !cur.reachable[j] {
                    continue;
                }
                if cur.p_up[j] > 0.0 {
                    next.reachable[cur.up[j] as usize] = true;
                }
                if cur.p_up[j] < 1.0 {
                    next.reachable[cur.down[j] as usize] = true;
                }
            }
        }

        Ok(Self {
            dt,
            steps_per_year,
            n_steps,
            levels,
            sqrt_dt,
        })
    }

    /// Value of the OU factor at node `(n, j)`.
    pub fn factor(&self, n: usize, j: usize) -> f64 {
        (2.0 * j as f64 - n as f64) * self.sqrt_dt
    }

    /// Reachable node indices of level `n`, ascending.
    pub fn reachable_nodes(&self, n: usize) -> Vec<usize> {
        self.levels[n]
            .reachable
            .iter()
            .enumerate()
            .filter_map(|(j, &r)| r.then_some(j))
            .collect()
    }

    /// Forward state probabilities of every level.
    pub fn state_probabilities(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_steps + 1);
        out.push(vec![1.0]);
        for n in 0..self.n_steps {
            let lvl = &self.levels[n];
            let mut next = vec![0.0; n + 2];
            for (j, &p) in out[n].iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                next[lvl.up[j] as usize] += p * lvl.p_up[j];
                next[lvl.down[j] as usize] += p * (1.0 - lvl.p_up[j]);
            }
            out.push(next);
        }
        out
    }

    /// Price at the root of a unit payoff at level `maturity_step`, discounting
    /// each step by `exp(-r dt)` at the departure node.
    pub fn discount_bond(&self, maturity_step: usize) -> f64 {
        let mut values = vec![1.0; maturity_step + 1];
        for n in (0..maturity_step).rev() {
            let lvl = &self.levels[n];
            values = (0..=n)
                .map(|j| {
                    let p = lvl.p_up[j];
                    (-lvl.rate[j] * self.dt).exp()
                        * (p * values[lvl.up[j] as usize]
                            + (1.0 - p) * values[lvl.down[j] as usize])
                })
                .collect();
        }
        values[0]
    }
}

/// Searches the up/down targets with the weak inequalities of the lattice
/// definition and the boundary conventions `up = n + 1`, `down = 0`.
fn jump_targets(n: usize, j: usize, target: f64, node: &impl Fn(usize, usize) -> f64) -> (usize, usize) {
    let top = n + 1;
    // first guess from inverting the node formula, then fix up exactly
    let sqrt_dt = node(1, 1);
    let guess = ((target / sqrt_dt + top as f64) / 2.0).clamp(0.0, top as f64);

    let mut ju = (guess.ceil() as usize).max(j + 1);
    while ju > j + 1 && node(top, ju - 1) >= target {
        ju -= 1;
    }
    while ju <= top && node(top, ju) < target {
        ju += 1;
    }
    let ju = ju.min(top);

    let mut jd = (guess.floor() as usize).min(j);
    while jd < j && node(top, jd + 1) <= target {
        jd += 1;
    }
    let jd = loop {
        if node(top, jd) <= target || jd == 0 {
            break jd;
        }
        jd -= 1;
    };
    (ju, jd)
}
