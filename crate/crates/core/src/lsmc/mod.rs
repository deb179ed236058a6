//! Longstaff-Schwartz valuation on anniversary-sampled paths with a
//! continuation value regressed separately in sectors of the fund axis.

mod paths;
mod regression;
mod sectors;

pub use paths::{simulate_paths, simulate_paths_from_stream, PathSet, PATH_CHUNK};
pub use regression::{
    basis, basis_len, fit_sector, DegreeRule, DegreeTrial, NormalEquations, Scaling, SectorFit,
    MAX_DEGREE, TRAIN_SHARE,
};
pub use sectors::{base_thresholds, partition_sectors, SectorPartition, MAX_SECTOR_SHARE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contract::{ElvaContract, MortalityTable};
use crate::error::{ElvaError, Result};
use crate::hull_white::HullWhiteParams;
use crate::levy::LevyModel;
use crate::stats::Estimate;

/// First random stream of the fresh paths used for out-of-sample pricing.
pub const OUT_OF_SAMPLE_STREAM: u64 = 1 << 40;

const SPLIT_STREAM_TAG: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LsmcConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Price on fresh paths under the rule estimated from the first set.
    pub out_of_sample: bool,
    pub max_degree: usize,
    /// Skip degree selection and use this degree in every sector.
    pub fixed_degree: Option<usize>,
    /// Sectors with fewer points borrow the fit of the nearest larger sector.
    pub min_sector_points: usize,
}

impl Default for LsmcConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            seed: 1,
            out_of_sample: false,
            max_degree: MAX_DEGREE,
            fixed_degree: None,
            min_sector_points: 10,
        }
    }
}

impl LsmcConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(ElvaError::invalid("n_paths", "need at least two paths"));
        }
        if self.max_degree > MAX_DEGREE || self.fixed_degree.is_some_and(|d| d > MAX_DEGREE) {
            return Err(ElvaError::invalid(
                "degree",
                format!("polynomial degree is capped at {MAX_DEGREE}"),
            ));
        }
        if self.min_sector_points == 0 {
            return Err(ElvaError::invalid("min_sector_points", "must be at least 1"));
        }
        Ok(())
    }

    fn degree_rule(&self, m: usize, sector: usize) -> DegreeRule {
        match self.fixed_degree {
            Some(d) => DegreeRule::Fixed(d),
            None => DegreeRule::Select {
                max_degree: self.max_degree,
                seed: self.seed,
                stream: SPLIT_STREAM_TAG | ((m as u64) << 32) | sector as u64,
            },
        }
    }
}

/// Estimated continuation value at one anniversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationModel {
    pub anniversary: usize,
    pub partition: SectorPartition,
    pub fits: Vec<SectorFit>,
    /// Sector whose points produced each fit.
    pub source: Vec<usize>,
}

impl ContinuationModel {
    pub fn evaluate(&self, fund: f64, rate: f64) -> f64 {
        self.fits[self.partition.sector_of(fund)].evaluate(fund, rate)
    }
}

/// Fits the continuation value `y` against `(F_m, r_m)` sector by sector.
pub fn fit_local_regression(
    fund: &[f64],
    rate: &[f64],
    y: &[f64],
    partition: SectorPartition,
    m: usize,
    config: &LsmcConfig,
) -> ContinuationModel {
    let populated: Vec<usize> = (0..partition.members.len())
        .filter(|&s| partition.members[s].len() >= config.min_sector_points)
        .collect();

    if populated.is_empty() {
        let all: Vec<usize> = (0..fund.len()).collect();
        let fit = fit_sector(&all, fund, rate, y, config.degree_rule(m, 0));
        let n = partition.len();
        return ContinuationModel {
            anniversary: m,
            partition,
            fits: vec![fit; n],
            source: vec![0; n],
        };
    }

    let own: Vec<SectorFit> = populated
        .par_iter()
        .map(|&s| fit_sector(&partition.members[s], fund, rate, y, config.degree_rule(m, s)))
        .collect();

    let mut fits = Vec::with_capacity(partition.len());
    let mut source = Vec::with_capacity(partition.len());
    for s in 0..partition.len() {
        let nearest = populated
            .iter()
            .enumerate()
            .min_by_key(|(_, &p)| (p.abs_diff(s), p))
            .map(|(i, _)| i)
            .expect("populated is not empty");
        fits.push(own[nearest].clone());
        source.push(populated[nearest]);
    }
    ContinuationModel {
        anniversary: m,
        partition,
        fits,
        source,
    }
}

/// Continuation models for anniversaries `1..M`, indexed by `m - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub models: Vec<ContinuationModel>,
}

impl StoppingRule {
    pub fn exercises(&self, contract: &ElvaContract, m: usize, fund: f64, rate: f64) -> bool {
        let sb = contract.surrender_benefit(m, fund);
        sb > 0.0 && sb >= self.models[m - 1].evaluate(fund, rate)
    }
}

/// Per-path discounted cashflows and the anniversary each path stops at
/// (`M` when it never surrenders).
#[derive(Debug, Clone)]
pub struct Cashflows {
    pub values: Vec<f64>,
    pub stop: Vec<usize>,
}

impl Cashflows {
    pub fn estimate(&self) -> Result<Estimate> {
        Estimate::from_samples(&self.values)
    }

    /// Number of paths stopping at each anniversary `1..=M`, index `m - 1`.
    pub fn stop_counts(&self, years: usize) -> Vec<usize> {
        let mut counts = vec![0; years];
        for &m in &self.stop {
            counts[m - 1] += 1;
        }
        counts
    }
}

fn check_paths(paths: &PathSet, contract: &ElvaContract, table: &MortalityTable) -> Result<()> {
    contract.validate()?;
    if paths.years() != contract.maturity {
        return Err(ElvaError::invalid(
            "paths",
            format!(
                "paths cover {} years but the contract matures at {}",
                paths.years(),
                contract.maturity
            ),
        ));
    }
    for m in 1..contract.maturity {
        if !(table.survival(m) > 0.0) {
            return Err(ElvaError::DegenerateSurvival { interval: m });
        }
    }
    Ok(())
}

fn death_flow(contract: &ElvaContract, table: &MortalityTable, paths: &PathSet, m: usize, k: usize) -> f64 {
    table.mass(m) * (-paths.integral[m][k]).exp() * contract.death_benefit(m, paths.fund[m][k])
}

fn maturity_flow(contract: &ElvaContract, table: &MortalityTable, paths: &PathSet, k: usize) -> f64 {
    let big_m = contract.maturity;
    table.survival(big_m - 1)
        * (-paths.integral[big_m][k]).exp()
        * contract.death_benefit(big_m, paths.fund[big_m][k])
}

/// Cashflows of path `k` stopping at `stop`, summed in the order the
/// backward pass accumulates them.
fn stopped_value(contract: &ElvaContract, table: &MortalityTable, paths: &PathSet, k: usize, stop: usize) -> f64 {
    let big_m = contract.maturity;
    let (mut deaths, terminal) = if stop < big_m {
        let sb = contract.surrender_benefit(stop, paths.fund[stop][k]);
        (
            death_flow(contract, table, paths, stop, k),
            table.survival(stop) * (-paths.integral[stop][k]).exp() * sb,
        )
    } else {
        (0.0, maturity_flow(contract, table, paths, k))
    };
    for m in (1..stop.min(big_m)).rev() {
        deaths += death_flow(contract, table, paths, m, k);
    }
    deaths + terminal
}

/// Discounted cashflows when surrender is not allowed.
pub fn no_surrender_cashflows(
    paths: &PathSet,
    table: &MortalityTable,
    contract: &ElvaContract,
) -> Result<Cashflows> {
    check_paths(paths, contract, table)?;
    let big_m = contract.maturity;
    let values = (0..paths.len())
        .into_par_iter()
        .map(|k| stopped_value(contract, table, paths, k, big_m))
        .collect();
    Ok(Cashflows {
        values,
        stop: vec![big_m; paths.len()],
    })
}

pub fn price_no_surrender(paths: &PathSet, table: &MortalityTable, contract: &ElvaContract) -> Result<Estimate> {
    no_surrender_cashflows(paths, table, contract)?.estimate()
}

/// Estimates the stopping rule backwards from `M - 1` to 1 and returns it
/// with the in-sample cashflows it produces.
pub fn backward_induction(
    paths: &PathSet,
    contract: &ElvaContract,
    table: &MortalityTable,
    config: &LsmcConfig,
) -> Result<(StoppingRule, Cashflows)> {
    config.validate()?;
    check_paths(paths, contract, table)?;
    let n = paths.len();
    let big_m = contract.maturity;
    let mut deaths = vec![0.0; n];
    let mut terminal: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| maturity_flow(contract, table, paths, k))
        .collect();
    let mut stop = vec![big_m; n];
    let mut models = Vec::with_capacity(big_m.saturating_sub(1));

    for m in (1..big_m).rev() {
        let survival = table.survival(m);
        let fund = &paths.fund[m];
        let rate = &paths.rate[m];
        let integral = &paths.integral[m];
        let y: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| (deaths[k] + terminal[k]) * integral[k].exp() / survival)
            .collect();
        let partition = partition_sectors(fund, contract, m);
        let model = fit_local_regression(fund, rate, &y, partition, m, config);

        deaths
            .par_iter_mut()
            .zip(terminal.par_iter_mut())
            .zip(stop.par_iter_mut())
            .enumerate()
            .for_each(|(k, ((d, t), s))| {
                let death = death_flow(contract, table, paths, m, k);
                let sb = contract.surrender_benefit(m, fund[k]);
                if sb > 0.0 && sb >= model.evaluate(fund[k], rate[k]) {
                    *d = death;
                    *t = survival * (-integral[k]).exp() * sb;
                    *s = m;
                } else {
                    *d += death;
                }
            });
        models.push(model);
    }
    models.reverse();
    let values = deaths.iter().zip(&terminal).map(|(d, t)| d + t).collect();
    Ok((StoppingRule { models }, Cashflows { values, stop }))
}

/// Discounted cashflows of each path under a frozen stopping rule.
pub fn apply_rule(
    rule: &StoppingRule,
    paths: &PathSet,
    contract: &ElvaContract,
    table: &MortalityTable,
) -> Result<Cashflows> {
    check_paths(paths, contract, table)?;
    let big_m = contract.maturity;
    if rule.models.len() + 1 != big_m.max(1) {
        return Err(ElvaError::invalid("rule", "stopping rule does not match the maturity"));
    }
    let (values, stop) = (0..paths.len())
        .into_par_iter()
        .map(|k| {
            let stop = (1..big_m)
                .find(|&m| rule.exercises(contract, m, paths.fund[m][k], paths.rate[m][k]))
                .unwrap_or(big_m);
            (stopped_value(contract, table, paths, k, stop), stop)
        })
        .unzip();
    Ok(Cashflows { values, stop })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsmcResult {
    pub surrender: Estimate,
    pub no_surrender: Estimate,
    /// Estimated from per-path differences on the pricing paths.
    pub premium: Estimate,
    /// Paths surrendering at each anniversary `1..M`, index `m - 1`.
    pub surrender_counts: Vec<usize>,
    pub n_paths: usize,
    pub seed: u64,
    /// First random stream of the paths the prices were averaged over.
    pub pricing_stream: u64,
}

pub fn price(
    model: &LevyModel,
    hw: &HullWhiteParams,
    contract: &ElvaContract,
    table: &MortalityTable,
    config: &LsmcConfig,
) -> Result<LsmcResult> {
    config.validate()?;
    let paths = simulate_paths(model, hw, contract, config.n_paths, config.seed)?;
    let (rule, in_sample) = backward_induction(&paths, contract, table, config)?;
    let (pricing, surrender, stream) = if config.out_of_sample {
        drop(paths);
        let fresh = simulate_paths_from_stream(
            model,
            hw,
            contract,
            config.n_paths,
            config.seed,
            OUT_OF_SAMPLE_STREAM,
        )?;
        let flows = apply_rule(&rule, &fresh, contract, table)?;
        (fresh, flows, OUT_OF_SAMPLE_STREAM)
    } else {
        (paths, in_sample, 0)
    };
    let base = no_surrender_cashflows(&pricing, table, contract)?;
    let diff: Vec<f64> = surrender
        .values
        .iter()
        .zip(&base.values)
        .map(|(a, b)| a - b)
        .collect();
    let mut counts = surrender.stop_counts(contract.maturity);
    counts.pop();
    Ok(LsmcResult {
        surrender: surrender.estimate()?,
        no_surrender: base.estimate()?,
        premium: Estimate::from_samples(&diff)?,
        surrender_counts: counts,
        n_paths: config.n_paths,
        seed: config.seed,
        pricing_stream: stream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contract(years: usize, gamma: f64) -> ElvaContract {
        ElvaContract::new(years, 1.0, 0.01, 0.15, 0.01, 0.02, gamma, 30).unwrap()
    }

    fn nig() -> (LevyModel, HullWhiteParams) {
        (
            LevyModel::nig(6.0, -0.4, 2.0).unwrap(),
            HullWhiteParams::flat(0.2, 0.01, 0.02).unwrap(),
        )
    }

    fn table() -> MortalityTable {
        MortalityTable::new((1..=40).map(|m| 0.001 + 0.0002 * m as f64).collect()).unwrap()
    }

    #[test]
    fn pure_endowment_is_mean_discounted_maturity_benefit() {
        let (model, hw) = nig();
        let c = contract(5, 0.02);
        let paths = simulate_paths(&model, &hw, &c, 4000, 3).unwrap();
        let est = price_no_surrender(&paths, &MortalityTable::immortal(10), &c).unwrap();
        let direct = (0..4000)
            .map(|k| (-paths.integral[5][k]).exp() * c.death_benefit(5, paths.fund[5][k]))
            .sum::<f64>()
            / 4000.0;
        assert!((est.mean - direct).abs() < 1e-14);
    }

    #[test]
    fn zero_surrender_benefit_never_exercises() {
        let (model, hw) = nig();
        let c = contract(10, 1.0);
        let t = table();
        let paths = simulate_paths(&model, &hw, &c, 5000, 8).unwrap();
        let (rule, flows) = backward_induction(&paths, &c, &t, &LsmcConfig::new(5000, 8)).unwrap();
        let base = no_surrender_cashflows(&paths, &t, &c).unwrap();
        assert_eq!(flows.values, base.values);
        assert!(flows.stop.iter().all(|&m| m == 10));
        assert_eq!(apply_rule(&rule, &paths, &c, &t).unwrap().values, base.values);
    }

    #[test]
    fn frozen_rule_reproduces_in_sample_cashflows() {
        let (model, hw) = nig();
        let c = contract(8, 0.02);
        let t = table();
        let paths = simulate_paths(&model, &hw, &c, 6000, 21).unwrap();
        let (rule, flows) = backward_induction(&paths, &c, &t, &LsmcConfig::new(6000, 21)).unwrap();
        let again = apply_rule(&rule, &paths, &c, &t).unwrap();
        assert_eq!(flows.stop, again.stop);
        assert_eq!(flows.values, again.values);
        assert!(flows.stop.iter().any(|&m| m < 8));
    }

    fn toy() -> (PathSet, ElvaContract, MortalityTable) {
        let fund = vec![vec![1.0; 3], vec![1.25, 0.9, 1.02], vec![1.1, 1.4, 0.7]];
        let rate = vec![vec![0.02; 3], vec![0.03, 0.01, 0.02], vec![0.025, 0.0, 0.04]];
        let integral = vec![vec![0.0; 3], vec![0.025, 0.015, 0.02], vec![0.05, 0.02, 0.05]];
        let paths = PathSet::from_values(fund, rate, integral).unwrap();
        let c = ElvaContract::new(2, 1.0, 0.01, 0.15, 0.0, 0.0, 0.02, 30).unwrap();
        let t = MortalityTable::new(vec![0.05, 0.07]).unwrap();
        (paths, c, t)
    }

    #[test]
    fn three_path_toy_matches_exhaustive_search() {
        let (paths, c, t) = toy();
        let config = LsmcConfig {
            n_paths: 3,
            min_sector_points: 1,
            ..LsmcConfig::default()
        };
        let (_, flows) = backward_induction(&paths, &c, &t, &config).unwrap();
        let price = flows.values.iter().sum::<f64>() / 3.0;

        // every subset of paths that surrender at the first anniversary
        let s1 = t.survival(1);
        let flow = |k: usize, surrender: bool| {
            let death = t.mass(1) * (-paths.integral[1][k]).exp() * c.death_benefit(1, paths.fund[1][k]);
            let rest = if surrender {
                s1 * (-paths.integral[1][k]).exp() * c.surrender_benefit(1, paths.fund[1][k])
            } else {
                s1 * (-paths.integral[2][k]).exp() * c.death_benefit(2, paths.fund[2][k])
            };
            death + rest
        };
        let best = (0..8u32)
            .map(|mask| (0..3).map(|k| flow(k, mask >> k & 1 == 1)).sum::<f64>() / 3.0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((price - best).abs() < 1e-14, "{price} vs {best}");
        // the toy is built so that the optimum is a proper subset
        assert!(flows.stop.contains(&1) && flows.stop.contains(&2));
    }

    #[test]
    fn rejects_mismatched_paths() {
        let (paths, _, t) = toy();
        let c = contract(3, 0.02);
        assert!(backward_induction(&paths, &c, &t, &LsmcConfig::default()).is_err());
    }

    #[test]
    fn same_seed_same_prices() {
        let (model, hw) = nig();
        let c = contract(6, 0.02);
        let t = table();
        let config = LsmcConfig::new(4000, 77);
        let a = price(&model, &hw, &c, &t, &config).unwrap();
        let b = price(&model, &hw, &c, &t, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.surrender.mean.to_bits(), b.surrender.mean.to_bits());
    }

    #[test]
    fn out_of_sample_rule_does_not_beat_never_surrendering_by_chance() {
        let (model, hw) = nig();
        let c = contract(10, 0.02);
        let t = table();
        let config = LsmcConfig {
            out_of_sample: true,
            ..LsmcConfig::new(20_000, 5)
        };
        let r = price(&model, &hw, &c, &t, &config).unwrap();
        assert_eq!(r.pricing_stream, OUT_OF_SAMPLE_STREAM);
        assert!(r.surrender.mean >= r.no_surrender.mean - 3.0 * r.premium.std_error);
        assert!(r.premium.mean > 0.0);
    }
}
