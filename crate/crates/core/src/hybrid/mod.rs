//! Hybrid pricer: the short rate lives on a binomial lattice and, on every
//! lattice node, the contract value is a row over a log-fund grid advanced
//! by IMEX finite-difference steps of the local PIDE.

mod grid;
mod operator;

pub use grid::LogPriceGrid;
pub use operator::{ImexStepper, DIRECT_STENCIL_MAX};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contract::{ElvaContract, MortalityTable};
use crate::error::{ElvaError, Result};
use crate::hull_white::{HullWhiteParams, RateTree, DEFAULT_MAX_TREE_STEPS};
use crate::levy::{discretize_jumps, stable_cutoff, truncation_bound, JumpDiscretization, LevyModel};
use crate::SurrenderMode;

pub const DEFAULT_WIDTH_SD: f64 = 6.0;
pub const DEFAULT_JUMP_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_GRID: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    pub dy: f64,
    pub steps_per_year: usize,
    /// Grid half-width in standard deviations of `ln F_M`.
    pub width_sd: f64,
    /// Small-jump cutoff. When unset, the smallest multiple of `dy` keeping
    /// the explicit jump step monotone (`lambda_eps dt <= 1`).
    pub eps: Option<f64>,
    /// Truncation bound of the jump stencil; derived from `jump_tol` when unset.
    pub bound: Option<f64>,
    /// Admissible jump intensity beyond the truncation bound.
    pub jump_tol: f64,
    pub max_grid: usize,
    pub max_tree_steps: usize,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            dy: 0.01,
            steps_per_year: 10,
            width_sd: DEFAULT_WIDTH_SD,
            eps: None,
            bound: None,
            jump_tol: DEFAULT_JUMP_TOL,
            max_grid: DEFAULT_MAX_GRID,
            max_tree_steps: DEFAULT_MAX_TREE_STEPS,
        }
    }
}

impl HybridConfig {
    pub fn new(dy: f64, steps_per_year: usize) -> Self {
        Self {
            dy,
            steps_per_year,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dy > 0.0) || !self.dy.is_finite() {
            return Err(ElvaError::invalid("dy", "space step must be positive"));
        }
        if self.steps_per_year == 0 {
            return Err(ElvaError::invalid("n_t", "need at least one step per year"));
        }
        if !(self.width_sd > 0.0) || !self.width_sd.is_finite() {
            return Err(ElvaError::invalid("width_sd", "grid width must be positive"));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return Err(ElvaError::invalid("eps", "small-jump cutoff must be positive"));
            }
        }
        if !(self.jump_tol > 0.0) {
            return Err(ElvaError::invalid("jump_tol", "must be positive"));
        }
        Ok(())
    }
}

/// Surrender decision at anniversary `m` on every (rate node, fund node).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseRegion {
    pub anniversary: usize,
    pub funds: Vec<f64>,
    /// Short rate of each reachable lattice node, ascending.
    pub rates: Vec<f64>,
    /// `surrender[j][i]` for rate `rates[j]` and fund `funds[i]`.
    pub surrender: Vec<Vec<bool>>,
}

impl ExerciseRegion {
    pub fn count(&self) -> usize {
        self.surrender.iter().flatten().filter(|s| **s).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridResult {
    pub value: f64,
    pub regions: Vec<ExerciseRegion>,
}

/// Prepared hybrid pricer: grid, lattice and jump stencil are built once and
/// shared by the surrender and no-surrender runs.
#[derive(Debug, Clone)]
pub struct HybridPricer {
    contract: ElvaContract,
    mortality: MortalityTable,
    config: HybridConfig,
    grid: LogPriceGrid,
    tree: RateTree,
    jumps: JumpDiscretization,
    stepper: ImexStepper,
}

/// Standard deviation of `ln F_M` used to size the grid.
pub fn horizon_std(model: &LevyModel, hw: &HullWhiteParams, years: usize) -> f64 {
    let t = years as f64;
    (t * model.variance() + hw.sigma * hw.sigma * hw.integrated_factor_variance(t)).sqrt()
}

impl HybridPricer {
    pub fn new(
        contract: &ElvaContract,
        mortality: &MortalityTable,
        model: &LevyModel,
        hw: &HullWhiteParams,
        config: &HybridConfig,
    ) -> Result<Self> {
        contract.validate()?;
        model.validate()?;
        hw.validate()?;
        config.validate()?;
        let m = contract.maturity;
        let dy = config.dy;
        let half_width = config.width_sd * horizon_std(model, hw, m);
        let grid = LogPriceGrid::centred(contract.f0, dy, half_width, config.max_grid)?;

        let bound = match config.bound {
            Some(b) => b,
            None => {
                let b = truncation_bound(model, config.jump_tol)?;
                ((b / dy).ceil() * dy).max(dy)
            }
        };
        let dt = 1.0 / config.steps_per_year as f64;
        let eps = match config.eps {
            Some(e) => e,
            None => stable_cutoff(model, dy, bound, 1.0 / dt)?,
        };
        let bound = bound.max(eps);
        let jumps = discretize_jumps(model, dy, eps, bound)?;

        let tree = RateTree::build_with_limit(hw, m, config.steps_per_year, config.max_tree_steps)?;
        let stepper = ImexStepper::new(grid.len, dy, tree.dt, model.gaussian_sigma(), &jumps);
        Ok(Self {
            contract: contract.clone(),
            mortality: mortality.clone(),
            config: config.clone(),
            grid,
            tree,
            jumps,
            stepper,
        })
    }

    pub fn grid(&self) -> &LogPriceGrid {
        &self.grid
    }

    pub fn tree(&self) -> &RateTree {
        &self.tree
    }

    pub fn jumps(&self) -> &JumpDiscretization {
        &self.jumps
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn price(&self, mode: SurrenderMode) -> Result<f64> {
        Ok(self.run(mode, &[])?.value)
    }

    /// Price together with the surrender regions at the given anniversaries.
    pub fn run(&self, mode: SurrenderMode, regions: &[usize]) -> Result<HybridResult> {
        let contract = match mode {
            SurrenderMode::Surrender => self.contract.clone(),
            SurrenderMode::NoSurrender => self.contract.without_surrender(),
        };
        let big_m = contract.maturity;
        if let Some(&bad) = regions.iter().find(|&&m| m == 0 || m >= big_m) {
            return Err(ElvaError::invalid(
                "anniversary",
                format!("exercise region needs 1 <= m < {big_m}, got {bad}"),
            ));
        }
        let death_probs = (1..big_m)
            .map(|m| self.mortality.conditional_death_prob(m))
            .collect::<Result<Vec<f64>>>()?;

        let funds = self.grid.funds();
        let nt = self.config.steps_per_year;
        let total = big_m * nt;
        let terminal: Vec<f64> = funds
            .iter()
            .map(|&f| contract.death_benefit(big_m, f))
            .collect();
        let mut next: Vec<Vec<f64>> = self.tree.levels[total]
            .reachable
            .iter()
            .map(|&r| if r { terminal.clone() } else { Vec::new() })
            .collect();
        let mut captured = Vec::new();

        for n in (0..total).rev() {
            let qhat = contract.effective_dividend(n / nt);
            let mut cur = self.rollback_level(n, &next, qhat);

            if n % nt == 0 && n > 0 {
                let m = n / nt;
                if regions.contains(&m) {
                    captured.push(self.region(&contract, m, &cur, &funds));
                }
                let p = death_probs[m - 1];
                let db: Vec<f64> = funds.iter().map(|&f| contract.death_benefit(m, f)).collect();
                let sb: Vec<f64> = funds
                    .iter()
                    .map(|&f| contract.surrender_benefit(m, f))
                    .collect();
                cur.par_iter_mut().for_each(|row| {
                    for (i, v) in row.iter_mut().enumerate() {
                        *v = p * db[i] + (1.0 - p) * sb[i].max(*v);
                    }
                });
            }
            next = cur;
        }

        let root = &next[0];
        if let Some(bad) = root.iter().find(|v| !v.is_finite()) {
            return Err(ElvaError::Numerical(format!("non-finite value {bad} at the root")));
        }
        let value = self.grid.interpolate(root, contract.f0.ln());
        captured.sort_by_key(|r: &ExerciseRegion| r.anniversary);
        Ok(HybridResult {
            value,
            regions: captured,
        })
    }

    /// Values at level `n` from the values at level `n + 1`.
    fn rollback_level(&self, n: usize, next: &[Vec<f64>], qhat: f64) -> Vec<Vec<f64>> {
        let level = &self.tree.levels[n];
        let len = self.grid.len;
        let mut cur: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
        cur.par_chunks_mut(2).enumerate().for_each(|(c, slot)| {
            let nodes: Vec<usize> = (0..slot.len())
                .map(|s| 2 * c + s)
                .filter(|&j| level.reachable[j])
                .collect();
            if nodes.is_empty() {
                return;
            }
            let averaged: Vec<Vec<f64>> = nodes
                .iter()
                .map(|&j| {
                    let p = level.p_up[j];
                    let up = &next[level.up[j] as usize];
                    let down = &next[level.down[j] as usize];
                    if p == 1.0 {
                        up.clone()
                    } else if p == 0.0 {
                        down.clone()
                    } else {
                        up.iter()
                            .zip(down)
                            .map(|(u, d)| p * u + (1.0 - p) * d)
                            .collect()
                    }
                })
                .collect();
            let mut out0 = vec![0.0; len];
            let mut out1 = vec![0.0; if nodes.len() > 1 { len } else { 0 }];
            let second = averaged.get(1).unwrap_or(&averaged[0]);
            let rates = [level.rate[nodes[0]], level.rate[*nodes.last().unwrap()]];
            self.stepper.step(
                [&averaged[0], second],
                [&mut out0, &mut out1],
                rates,
                qhat,
                nodes.len(),
            );
            slot[nodes[0] - 2 * c] = out0;
            if nodes.len() > 1 {
                slot[nodes[1] - 2 * c] = out1;
            }
        });
        cur
    }

    fn region(
        &self,
        contract: &ElvaContract,
        m: usize,
        values: &[Vec<f64>],
        funds: &[f64],
    ) -> ExerciseRegion {
        let n = m * self.config.steps_per_year;
        let level = &self.tree.levels[n];
        let nodes = self.tree.reachable_nodes(n);
        let sb: Vec<f64> = funds
            .iter()
            .map(|&f| contract.surrender_benefit(m, f))
            .collect();
        ExerciseRegion {
            anniversary: m,
            funds: funds.to_vec(),
            rates: nodes.iter().map(|&j| level.rate[j]).collect(),
            surrender: nodes
                .iter()
                .map(|&j| values[j].iter().zip(&sb).map(|(v, s)| s >= v).collect())
                .collect(),
        }
    }

    /// Prices with and without the surrender right.
    pub fn premium(&self) -> Result<Premium> {
        let (s, ns) = rayon::join(
            || self.price(SurrenderMode::Surrender),
            || self.price(SurrenderMode::NoSurrender),
        );
        Ok(Premium::new(s?, ns?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Premium {
    pub surrender: f64,
    pub no_surrender: f64,
    pub premium: f64,
}

impl Premium {
    pub fn new(surrender: f64, no_surrender: f64) -> Self {
        Self {
            surrender,
            no_surrender,
            premium: surrender - no_surrender,
        }
    }
}
