//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status when any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::Instant;

use elva_cli::run::write_region_csv;
use elva_cli::Preset;
use elva_core::hull_white::{sample_rate_paths, RateTree};
use elva_core::hybrid::{HybridConfig, Premium};
use elva_core::levy::IncrementSampler;
use elva_core::lsmc::{self, backward_induction};
use elva_core::quad::GaussLegendre;
use elva_core::stats::Z_99;
use elva_core::{
    ElvaContract, HullWhiteParams, HybridPricer, LevyModel, LsmcConfig, MortalityTable, PathSet, SurrenderMode,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TABLE_TOL: f64 = 0.0015;
const BENCHMARK_TOL: f64 = 0.0005;
const STATICS_TOL: f64 = 0.002;
const LSMC_SEED: u64 = 1;
const MC_SIGMAS: f64 = 4.0;

fn nig() -> LevyModel {
    LevyModel::nig(6.0, -0.4, 2.0).unwrap()
}

fn vg() -> LevyModel {
    LevyModel::vg(0.85, 0.0, 0.2).unwrap()
}

fn cgmy() -> LevyModel {
    LevyModel::cgmy(0.02, 5.0, 15.0, 1.2).unwrap()
}

fn mjd() -> LevyModel {
    LevyModel::mjd(0.25, 0.6, 0.01, 0.13).unwrap()
}

#[derive(Clone, Copy)]
struct Case {
    g: f64,
    c: f64,
    alpha: f64,
    sigma_hw: f64,
    k_hw: f64,
}

impl Case {
    fn new(g: f64, c: f64) -> Self {
        Self {
            g,
            c,
            alpha: 0.02,
            sigma_hw: 0.03,
            k_hw: 0.2,
        }
    }

    fn contract(&self) -> ElvaContract {
        ElvaContract::new(25, 1.0, self.g, self.c, 0.01, self.alpha, 0.02, 30).unwrap()
    }

    fn rates(&self) -> HullWhiteParams {
        HullWhiteParams::flat(self.k_hw, self.sigma_hw, 0.02).unwrap()
    }

    fn key(&self, model: &LevyModel, preset: Preset) -> String {
        format!(
            "{} {preset:?} g={} c={} a={} s={} k={}",
            model.name(),
            self.g,
            self.c,
            self.alpha,
            self.sigma_hw,
            self.k_hw
        )
    }
}

fn hybrid_config(preset: Preset) -> HybridConfig {
    let (_, dy, steps) = preset.resolution();
    HybridConfig::new(dy, steps)
}

struct Suite {
    table: MortalityTable,
    hybrid: HashMap<String, Premium>,
    failures: usize,
}

impl Suite {
    fn premium(&mut self, model: &LevyModel, case: Case, preset: Preset) -> Premium {
        let key = case.key(model, preset);
        if let Some(p) = self.hybrid.get(&key) {
            return *p;
        }
        let pricer = HybridPricer::new(&case.contract(), &self.table, model, &case.rates(), &hybrid_config(preset))
            .expect("hybrid pricer");
        let p = pricer.premium().expect("hybrid premium");
        self.hybrid.insert(key, p);
        p
    }

    fn report(&mut self, id: usize, title: &str, start: Instant, checks: Vec<(bool, String)>) {
        let ok = checks.iter().all(|(pass, _)| *pass);
        if !ok {
            self.failures += 1;
        }
        println!(
            "criterion {id:>2} {} {title} ({:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for (pass, line) in checks {
            println!("      {} {line}", if pass { "ok " } else { "BAD" });
        }
    }
}

fn nig_premium_table(s: &mut Suite) {
    let start = Instant::now();
    let printed = [
        (0.01, 0.05, 0.1523),
        (0.01, 0.15, 0.1888),
        (0.01, 0.30, 0.1870),
        (0.03, 0.05, 0.0457),
        (0.03, 0.15, 0.1304),
        (0.03, 0.30, 0.1499),
    ];
    let checks = printed
        .iter()
        .map(|&(g, c, target)| {
            let p = s.premium(&nig(), Case::new(g, c), Preset::B).premium;
            (
                (p - target).abs() <= TABLE_TOL,
                format!("NIG g={g} c={c}: {p:.6} vs {target} (tol {TABLE_TOL})"),
            )
        })
        .collect();
    s.report(1, "NIG premia at configuration B", start, checks);
}

fn cross_model(s: &mut Suite) {
    let start = Instant::now();
    let cells = [
        (vg(), 0.01, 0.05, 0.1327),
        (cgmy(), 0.03, 0.30, 0.0369),
        (mjd(), 0.01, 0.30, 0.1431),
    ];
    let checks = cells
        .iter()
        .map(|(model, g, c, target)| {
            let p = s.premium(model, Case::new(*g, *c), Preset::B).premium;
            (
                (p - target).abs() <= TABLE_TOL,
                format!("{} g={g} c={c}: {p:.6} vs {target} (tol {TABLE_TOL})", model.name()),
            )
        })
        .collect();
    s.report(2, "VG, CGMY and MJD spot checks", start, checks);
}

fn convergence(s: &mut Suite) {
    let start = Instant::now();
    let presets = [Preset::A, Preset::B, Preset::C, Preset::D];
    let values: Vec<f64> = presets
        .iter()
        .map(|&p| s.premium(&nig(), Case::new(0.01, 0.05), p).premium)
        .collect();
    let mut checks: Vec<(bool, String)> = presets
        .windows(2)
        .zip(values.windows(2))
        .map(|(p, v)| (v[1] <= v[0], format!("{:?} -> {:?}: {:.6} -> {:.6}", p[0], p[1], v[0], v[1])))
        .collect();
    let d = values[3];
    checks.push((
        (d - 0.1520).abs() <= BENCHMARK_TOL,
        format!("D = {d:.6} vs benchmark 0.1520 (tol {BENCHMARK_TOL})"),
    ));
    s.report(3, "convergence towards the benchmark", start, checks);
}

fn method_agreement(s: &mut Suite) -> lsmc::LsmcResult {
    let start = Instant::now();
    let case = Case::new(0.01, 0.15);
    let (n_paths, _, _) = Preset::B.resolution();
    let config = LsmcConfig::new(n_paths, LSMC_SEED);
    let mut checks = Vec::new();
    let mut nig_result = None;
    for model in [nig(), vg(), cgmy(), mjd()] {
        let hybrid = s.premium(&model, case, Preset::B).premium;
        let t = Instant::now();
        let r = lsmc::price(&model, &case.rates(), &case.contract(), &s.table, &config).expect("lsmc");
        let centre = r.surrender.mean - r.no_surrender.mean;
        let half = Z_99 * r.premium.std_error;
        checks.push((
            (hybrid - centre).abs() <= half,
            format!(
                "{}: hybrid {hybrid:.6} in LSMC {centre:.6} +- {half:.6} ({:.1} s)",
                model.name(),
                t.elapsed().as_secs_f64()
            ),
        ));
        if matches!(model, LevyModel::Nig { .. }) {
            nig_result = Some(r);
        }
    }
    s.report(4, "hybrid inside the LSMC 99% interval", start, checks);
    nig_result.unwrap()
}

fn mean_var(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, var, ((m4 - var * var) / n).sqrt())
}

fn tree_factor_moments(tree: &RateTree, n: usize) -> (f64, f64) {
    let probs = tree.state_probabilities();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (j, p) in probs[n].iter().enumerate() {
        let x = tree.factor(n, j);
        m1 += p * x;
        m2 += p * x * x;
    }
    (m1, m2 - m1 * m1)
}

fn rate_model(s: &mut Suite) {
    let start = Instant::now();
    let (k, sigma, r0) = (0.2, 0.03, 0.02);
    let hw = HullWhiteParams::flat(k, sigma, r0).unwrap();
    let mut checks = Vec::new();

    for (steps, tol) in [(10, 3e-3), (100, 5e-4)] {
        let tree = RateTree::build(&hw, 25, steps).unwrap();
        for t in [1usize, 5, 25] {
            let zcb = tree.discount_bond(steps * t);
            let exact = (-r0 * t as f64).exp();
            let rel = zcb / exact - 1.0;
            checks.push((rel.abs() <= tol, format!("tree N_T={steps} P(0,{t}) = {zcb:.6}, rel err {rel:.2e} (tol {tol})")));
        }
    }

    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let paths = sample_rate_paths(&hw, 25, n, &mut rng);
    let disc: Vec<f64> = paths.integral[25].iter().map(|i| (-i).exp()).collect();
    let (mean, var, _) = mean_var(&disc);
    let se = (var / n as f64).sqrt();
    let exact = (-0.5f64).exp();
    checks.push((
        (mean - exact).abs() <= MC_SIGMAS * se,
        format!("E[exp(-I_25)] = {mean:.6} +- {se:.1e} vs {exact:.6}"),
    ));
    let tree_zcb = RateTree::build(&hw, 25, 100).unwrap().discount_bond(2500);
    checks.push((
        (mean - tree_zcb).abs() <= MC_SIGMAS * se + 5e-4 * exact,
        format!("simulator {mean:.6} vs tree {tree_zcb:.6}"),
    ));
    for m in [1usize, 5, 25] {
        let (mean, var, var_se) = mean_var(&paths.rate[m]);
        let beta = hw.beta(m as f64);
        let exact_var = sigma * sigma * (1.0 - (-2.0 * k * m as f64).exp()) / (2.0 * k);
        let mean_se = (var / n as f64).sqrt();
        checks.push((
            (mean - beta).abs() <= MC_SIGMAS * mean_se && (var - exact_var).abs() <= MC_SIGMAS * var_se,
            format!("r_{m}: mean {mean:.6} vs {beta:.6}, var {var:.3e} vs {exact_var:.3e}"),
        ));
    }

    for t in [1usize, 25] {
        let exact = (1.0 - (-2.0 * k * t as f64).exp()) / (2.0 * k);
        let errors: Vec<(f64, f64)> = [10usize, 40, 160]
            .iter()
            .map(|&steps| {
                let tree = RateTree::build(&hw, t, steps).unwrap();
                let (m, v) = tree_factor_moments(&tree, steps * t);
                (m.abs(), (v - exact).abs())
            })
            .collect();
        let monotone = errors.windows(2).all(|w| w[1].1 < w[0].1);
        let mean_small = errors.iter().zip([0.1, 0.025, 0.00625]).all(|((m, _), dt)| *m <= dt);
        checks.push((
            monotone && mean_small,
            format!(
                "tree factor at t={t}: variance errors {:.2e} {:.2e} {:.2e}, |mean| {:.1e}",
                errors[0].1, errors[1].1, errors[2].1, errors[2].0
            ),
        ));
    }
    s.report(5, "rate-model properties", start, checks);
}

fn compensated_integral(model: &LevyModel, xi: f64) -> Complex64 {
    let gl = GaussLegendre::new(24);
    let part = |y: f64, imag: bool| {
        let u = xi * y;
        let w = if u.abs() < 1e-3 {
            if imag {
                u.powi(3) / 6.0 - u.powi(5) / 120.0
            } else {
                u * u / 2.0 - u.powi(4) / 24.0
            }
        } else if imag {
            u - u.sin()
        } else {
            1.0 - u.cos()
        };
        w * model.levy_density(y).unwrap()
    };
    let mut total = Complex64::new(0.0, 0.0);
    for sign in [-1.0, 1.0] {
        let mut hi = 12.0;
        for _ in 0..90 {
            let lo = hi / 2.0;
            total += Complex64::new(
                gl.integrate(lo, hi, |y| part(sign * y, false)),
                gl.integrate(lo, hi, |y| part(sign * y, true)),
            );
            hi = lo;
        }
    }
    total
}

fn levy_properties(s: &mut Suite) {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (i, model) in [nig(), vg(), cgmy(), mjd()].iter().enumerate() {
        let name = model.name();
        let at_zero = model.char_exponent(Complex64::new(0.0, 0.0)).unwrap().norm();
        let corrected = model.char_exponent_corrected(-Complex64::i()).unwrap().norm();
        checks.push((
            at_zero < 1e-12 && corrected < 1e-12,
            format!("{name}: |psi(0)| = {at_zero:.1e}, |corrected psi(-i)| = {corrected:.1e}"),
        ));

        let tol = if matches!(model, LevyModel::Cgmy { .. }) { 1e-3 } else { 1e-4 };
        let sigma = model.gaussian_sigma();
        let worst = [0.5, 1.0, 3.0]
            .iter()
            .map(|&xi| {
                let psi = model.char_exponent(Complex64::new(xi, 0.0)).unwrap() + Complex64::i() * xi * model.mean();
                let quad = 0.5 * sigma * sigma * xi * xi + compensated_integral(model, xi);
                (psi - quad).norm()
            })
            .fold(0.0, f64::max);
        checks.push((worst <= tol, format!("{name}: density vs exponent, worst gap {worst:.1e} (tol {tol})")));

        let sampler = IncrementSampler::new(model, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let draws: Vec<f64> = (0..1_000_000).map(|_| sampler.sample(&mut rng)).collect();
        for xi in [1.0, 2.0] {
            let n = draws.len() as f64;
            let mut sum = Complex64::new(0.0, 0.0);
            for x in &draws {
                sum += Complex64::from_polar(1.0, xi * x);
            }
            let emp = sum / n;
            let se = ((1.0 - emp.norm_sqr()) / n).sqrt();
            let exact = (-model.char_exponent(Complex64::new(xi, 0.0)).unwrap()).exp();
            let gap = (emp - exact).norm();
            checks.push((
                gap <= MC_SIGMAS * se,
                format!("{name}: sampled cf at {xi}: gap {gap:.1e} vs {MC_SIGMAS} se = {:.1e}", MC_SIGMAS * se),
            ));
        }
        let (mean, var, var_se) = mean_var(&draws);
        let mean_se = (var / draws.len() as f64).sqrt();
        checks.push((
            (mean - model.mean()).abs() <= MC_SIGMAS * mean_se
                && (var - model.variance()).abs() <= MC_SIGMAS * var_se,
            format!(
                "{name}: sample mean {mean:.5} vs {:.5}, variance {var:.5} vs {:.5}",
                model.mean(),
                model.variance()
            ),
        ));
    }
    s.report(6, "Levy model properties", start, checks);
}

fn stopping_oracle(s: &mut Suite) {
    let start = Instant::now();
    let fund = vec![vec![1.0; 3], vec![1.25, 0.9, 1.02], vec![1.1, 1.4, 0.7]];
    let rate = vec![vec![0.02; 3], vec![0.03, 0.01, 0.02], vec![0.025, 0.0, 0.04]];
    let integral = vec![vec![0.0; 3], vec![0.025, 0.015, 0.02], vec![0.05, 0.02, 0.05]];
    let paths = PathSet::from_values(fund, rate, integral).unwrap();
    let contract = ElvaContract::new(2, 1.0, 0.01, 0.15, 0.0, 0.0, 0.02, 30).unwrap();
    let table = MortalityTable::new(vec![0.05, 0.07]).unwrap();
    let config = LsmcConfig {
        n_paths: 3,
        min_sector_points: 1,
        ..LsmcConfig::default()
    };
    let (_, flows) = backward_induction(&paths, &contract, &table, &config).unwrap();
    let estimate = flows.estimate().unwrap().mean;

    let flow = |k: usize, surrender: bool| {
        let death = table.mass(1) * (-paths.integral[1][k]).exp() * contract.death_benefit(1, paths.fund[1][k]);
        let rest = if surrender {
            table.survival(1) * (-paths.integral[1][k]).exp() * contract.surrender_benefit(1, paths.fund[1][k])
        } else {
            table.survival(1) * (-paths.integral[2][k]).exp() * contract.death_benefit(2, paths.fund[2][k])
        };
        death + rest
    };
    let (best, mask) = (0..8u32)
        .map(|mask| ((0..3).map(|k| flow(k, mask >> k & 1 == 1)).sum::<f64>() / 3.0, mask))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    let chosen: u32 = flows.stop.iter().enumerate().map(|(k, &m)| u32::from(m == 1) << k).sum();
    s.report(
        7,
        "three-path optimal stopping oracle",
        start,
        vec![
            (estimate == best, format!("backward induction {estimate:.17} vs brute force {best:.17}")),
            (chosen == mask, format!("surrender set {chosen:03b} vs optimum {mask:03b}")),
        ],
    );
}

fn comparative_statics(s: &mut Suite) {
    let start = Instant::now();
    let model = nig();
    let mut checks = Vec::new();
    let base = Case::new(0.01, 0.15);

    let cs = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];
    let vc: Vec<f64> = cs.iter().map(|&c| s.premium(&model, Case { c, ..base }, Preset::B).premium).collect();
    let concave = vc.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] <= STATICS_TOL);
    let argmax = (0..cs.len()).max_by(|&a, &b| vc[a].total_cmp(&vc[b])).unwrap();
    let interior = (0.15..=0.20).contains(&cs[argmax]);
    checks.push((
        concave && interior,
        format!("c: {} (max at {})", fmt_series(&cs, &vc), cs[argmax]),
    ));

    let mut directional = |name: &str, grid: &[f64], sign: f64, set: &dyn Fn(f64) -> Case| {
        let v: Vec<f64> = grid.iter().map(|&x| s.premium(&model, set(x), Preset::B).premium).collect();
        let ok = v.windows(2).all(|w| sign * (w[1] - w[0]) >= -STATICS_TOL);
        let dir = if sign > 0.0 { "nondecreasing" } else { "nonincreasing" };
        checks.push((ok, format!("{name} {dir}: {}", fmt_series(grid, &v))));
    };
    directional("g", &[0.01, 0.02, 0.03], -1.0, &|g| Case { g, ..base });
    directional("alpha", &[0.0, 0.01, 0.02], 1.0, &|alpha| Case { alpha, ..base });
    directional("sigma_HW", &[0.01, 0.03, 0.05], 1.0, &|sigma_hw| Case { sigma_hw, ..base });
    directional("k_HW", &[0.1, 0.2, 0.4], -1.0, &|k_hw| Case { k_hw, ..base });
    s.report(8, "comparative statics", start, checks);
}

fn fmt_series(x: &[f64], y: &[f64]) -> String {
    x.iter()
        .zip(y)
        .map(|(a, b)| format!("{a}:{b:.5}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `(rate, fund) -> surrender_optimal` read back from an exported region file.
fn read_region(path: &Path) -> BTreeMap<u64, Vec<(f64, bool)>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rows: BTreeMap<u64, Vec<(f64, bool)>> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let mut cols = line.split(',');
        let fund: f64 = cols.next().unwrap().parse().unwrap();
        let rate: f64 = cols.next().unwrap().parse().unwrap();
        let flag = cols.next().unwrap() == "1";
        // order-preserving key for the rate
        let key = if rate >= 0.0 { rate.to_bits() | 1 << 63 } else { !rate.to_bits() };
        rows.entry(key).or_default().push((fund, flag));
    }
    rows
}

fn rate_of(key: u64) -> f64 {
    if key >> 63 == 1 {
        f64::from_bits(key & !(1 << 63))
    } else {
        f64::from_bits(!key)
    }
}

fn exercise_regions(s: &mut Suite) {
    let start = Instant::now();
    let case = Case::new(0.01, 0.15);
    let pricer = HybridPricer::new(&case.contract(), &s.table, &nig(), &case.rates(), &hybrid_config(Preset::B)).unwrap();
    let result = pricer.run(SurrenderMode::Surrender, &[5, 20]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = result
        .regions
        .iter()
        .map(|r| write_region_csv(dir.path(), r).unwrap())
        .collect();
    let early = read_region(&files[0]);
    let late = read_region(&files[1]);
    let mut checks = Vec::new();

    for (m, grid) in [(5, &early), (20, &late)] {
        let mut violations = 0;
        let mut cells = 0;
        let n_funds = grid.values().next().unwrap().len();
        for i in 0..n_funds {
            let mut seen = false;
            for row in grid.values() {
                cells += 1;
                if row[i].1 {
                    seen = true;
                } else if seen {
                    violations += 1;
                }
            }
        }
        checks.push((
            violations == 0,
            format!("m={m}: {violations} of {cells} cells break monotonicity in r"),
        ));
    }

    // compare the rows closest to the initial short rate
    let nearest = |grid: &BTreeMap<u64, Vec<(f64, bool)>>| {
        grid.iter()
            .min_by(|a, b| (rate_of(*a.0) - 0.03).abs().total_cmp(&(rate_of(*b.0) - 0.03).abs()))
            .map(|(k, row)| (rate_of(*k), row.clone()))
            .unwrap()
    };
    let (r5, row5) = nearest(&early);
    let (r20, row20) = nearest(&late);
    let band: Vec<usize> = (0..row20.len()).filter(|&i| row20[i].1 && !row5[i].1).collect();
    let first = row20.iter().position(|x| x.1);
    let last = row20.iter().rposition(|x| x.1);
    let intermediate = matches!((first, last), (Some(a), Some(b)) if a > 0 && b + 1 < row20.len());
    let width = match (band.first(), band.last()) {
        (Some(&a), Some(&b)) => row20[b].0.ln() - row20[a].0.ln(),
        _ => 0.0,
    };
    let contiguous = band.windows(2).all(|w| w[1] == w[0] + 1);
    let (lo, hi) = (first.map_or(f64::NAN, |i| row20[i].0), last.map_or(f64::NAN, |i| row20[i].0));
    checks.push((
        intermediate && contiguous && width > 0.5,
        format!(
            "m=20 at r={r20:.4}: surrender for F in [{lo:.3}, {hi:.3}]; band of log-width {width:.2} absent at m=5 (r={r5:.4})"
        ),
    ));
    s.report(9, "exercise-region structure", start, checks);
}

fn determinism(s: &mut Suite, recorded: &lsmc::LsmcResult) {
    let start = Instant::now();
    let case = Case::new(0.01, 0.15);
    let config = LsmcConfig::new(recorded.n_paths, recorded.seed);
    let again = lsmc::price(&nig(), &case.rates(), &case.contract(), &s.table, &config).unwrap();
    let cached = s.premium(&nig(), case, Preset::B);
    let fresh = HybridPricer::new(&case.contract(), &s.table, &nig(), &case.rates(), &hybrid_config(Preset::B))
        .unwrap()
        .premium()
        .unwrap();
    s.report(
        10,
        "determinism",
        start,
        vec![
            (
                again == *recorded && again.surrender.mean.to_bits() == recorded.surrender.mean.to_bits(),
                format!("LSMC seed {} rerun: {:.17} vs {:.17}", recorded.seed, again.surrender.mean, recorded.surrender.mean),
            ),
            (
                fresh.surrender.to_bits() == cached.surrender.to_bits()
                    && fresh.no_surrender.to_bits() == cached.no_surrender.to_bits(),
                format!("hybrid rerun: {:.17} vs {:.17}", fresh.surrender, cached.surrender),
            ),
        ],
    );
}

fn main() {
    let table = MortalityTable::load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mortality_age30.csv"))
        .expect("shipped mortality table");
    let mut suite = Suite {
        table,
        hybrid: HashMap::new(),
        failures: 0,
    };
    let start = Instant::now();
    nig_premium_table(&mut suite);
    cross_model(&mut suite);
    convergence(&mut suite);
    let recorded = method_agreement(&mut suite);
    rate_model(&mut suite);
    levy_properties(&mut suite);
    stopping_oracle(&mut suite);
    comparative_statics(&mut suite);
    exercise_regions(&mut suite);
    determinism(&mut suite, &recorded);
    println!(
        "acceptance: {} of 10 criteria passed in {:.0} s",
        10 - suite.failures,
        start.elapsed().as_secs_f64()
    );
    if suite.failures > 0 {
        std::process::exit(1);
    }
}
