//! Experiment files: TOML with optional sections falling back to the base
//! contract (NIG, Hull-White k = 0.2, sigma = 0.03, r0 = 0.02, M = 25).

use std::fmt;
use std::path::{Path, PathBuf};

use elva_core::hull_white::DiscountCurve;
use elva_core::lsmc::MAX_DEGREE;
use elva_core::{ElvaContract, HullWhiteParams, HybridConfig, LevyModel, LsmcConfig, MortalityTable};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hybrid,
    Lsmc,
    Both,
}

impl Method {
    pub fn uses_hybrid(self) -> bool {
        matches!(self, Self::Hybrid | Self::Both)
    }

    pub fn uses_lsmc(self) -> bool {
        matches!(self, Self::Lsmc | Self::Both)
    }
}

/// Numerical resolutions `(n_paths, dy, N_T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Preset {
    A,
    B,
    C,
    D,
    #[serde(alias = "BENCHMARK", alias = "Benchmark")]
    #[value(name = "benchmark")]
    #[serde(rename = "benchmark")]
    Benchmark,
}

impl Preset {
    pub fn resolution(self) -> (usize, f64, usize) {
        match self {
            Self::A => (43_000, 0.015, 7),
            Self::B => (250_000, 0.010, 10),
            Self::C => (670_000, 0.008, 15),
            Self::D => (2_000_000, 0.005, 22),
            Self::Benchmark => (40_000_000, 0.001, 100),
        }
    }
}

/// A value given once for every year or year by year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerYear {
    Same(f64),
    Each(Vec<f64>),
}

impl PerYear {
    fn expand(&self, len: usize) -> Vec<f64> {
        match self {
            Self::Same(v) => vec![*v; len],
            Self::Each(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_r0")]
    pub r0: f64,
    /// CSV of `maturity,zcb_price`; the curve is flat at `r0` otherwise.
    #[serde(default)]
    pub curve: Option<PathBuf>,
}

fn default_k() -> f64 {
    0.2
}
fn default_sigma() -> f64 {
    0.03
}
fn default_r0() -> f64 {
    0.02
}

impl Default for RatesSection {
    fn default() -> Self {
        Self {
            k: default_k(),
            sigma: default_sigma(),
            r0: default_r0(),
            curve: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractSection {
    pub maturity: usize,
    pub f0: f64,
    pub g: f64,
    pub c: f64,
    pub q: f64,
    pub alpha: PerYear,
    pub gamma: PerYear,
    pub omega: u32,
}

impl Default for ContractSection {
    fn default() -> Self {
        Self {
            maturity: 25,
            f0: 1.0,
            g: 0.01,
            c: 0.15,
            q: 0.01,
            alpha: PerYear::Same(0.02),
            gamma: PerYear::Same(0.02),
            omega: 30,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub dy: Option<f64>,
    pub steps_per_year: Option<usize>,
    pub width_sd: Option<f64>,
    pub eps: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub out_of_sample: Option<bool>,
    pub max_degree: Option<usize>,
    pub min_sector_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    C,
    G,
    Alpha,
    #[serde(rename = "sigma_HW", alias = "sigma_hw")]
    SigmaHw,
    #[serde(rename = "k_HW", alias = "k_hw")]
    KHw,
    AlphaLevy,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::C => "c",
            Self::G => "g",
            Self::Alpha => "alpha",
            Self::SigmaHw => "sigma_HW",
            Self::KHw => "k_HW",
            Self::AlphaLevy => "alpha_levy",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    pub anniversaries: Vec<usize>,
}

/// Contents of an experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub mortality: Option<PathBuf>,
    #[serde(default = "default_model")]
    pub model: LevyModel,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub contract: ContractSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub region: Option<RegionSection>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_method() -> Method {
    Method::Hybrid
}

fn default_model() -> LevyModel {
    LevyModel::Nig {
        alpha: 6.0,
        beta: -0.4,
        delta: 2.0,
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            preset: None,
            mortality: None,
            model: default_model(),
            rates: RatesSection::default(),
            contract: ContractSection::default(),
            numerics: NumericsSection::default(),
            sweep: None,
            region: None,
            output: None,
        }
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub method: Option<Method>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A failed check, named by its path in the experiment file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: None,
            message: e.to_string(),
        })
    }

    /// Reads a file; relative paths inside it are resolved against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse {
            path: Some(path.to_path_buf()),
            message: e.to_string(),
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Parse {
            path: Some(path.to_path_buf()),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut cfg.mortality, &mut cfg.rates.curve, &mut cfg.output]
            .into_iter()
            .flatten()
        {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = o.preset {
            self.preset = Some(p);
            self.numerics.n_paths = None;
            self.numerics.dy = None;
            self.numerics.steps_per_year = None;
        }
        if let Some(m) = o.method {
            self.method = m;
        }
        if let Some(s) = o.seed {
            self.numerics.seed = Some(s);
        }
        if let Some(out) = &o.out {
            self.output = Some(out.clone());
        }
    }

    /// Numerics with unset resolutions taken from the preset.
    pub fn effective_numerics(&self) -> NumericsSection {
        let mut n = self.numerics.clone();
        if let Some(p) = self.preset {
            let (paths, dy, nt) = p.resolution();
            n.n_paths = n.n_paths.or(Some(paths));
            n.dy = n.dy.or(Some(dy));
            n.steps_per_year = n.steps_per_year.or(Some(nt));
        }
        n
    }

    /// Checks every field without running an engine.
    pub fn resolve(&self) -> Result<Experiment, Vec<Violation>> {
        let mut v = Vec::new();
        let mut bad = |field: &str, message: String| {
            v.push(Violation {
                field: field.to_string(),
                message,
            })
        };

        if let Err(e) = self.model.validate() {
            bad(&format!("model.{}", error_field(&e).unwrap_or("kind")), e.to_string());
        }

        let curve = match &self.rates.curve {
            Some(p) => match DiscountCurve::load_csv(p) {
                Ok(c) => c,
                Err(e) => {
                    bad("rates.curve", format!("{}: {e}", p.display()));
                    DiscountCurve::Flat { rate: self.rates.r0 }
                }
            },
            None => DiscountCurve::Flat { rate: self.rates.r0 },
        };
        let hw = HullWhiteParams {
            k: self.rates.k,
            sigma: self.rates.sigma,
            r0: self.rates.r0,
            curve,
        };
        if !(hw.k > 0.0) || !hw.k.is_finite() {
            bad("rates.k", format!("mean reversion {} must be positive", hw.k));
        }
        if !(hw.sigma > 0.0) || !hw.sigma.is_finite() {
            bad("rates.sigma", format!("volatility {} must be positive", hw.sigma));
        }
        if !hw.r0.is_finite() {
            bad("rates.r0", "must be finite".to_string());
        }

        let c = &self.contract;
        let years = c.maturity;
        if years == 0 {
            bad("contract.maturity", "must be at least one year".to_string());
        }
        if !(c.f0 > 0.0) || !c.f0.is_finite() {
            bad("contract.f0", format!("initial premium {} must be positive", c.f0));
        }
        for (name, x) in [("g", c.g), ("c", c.c), ("q", c.q)] {
            if !x.is_finite() {
                bad(&format!("contract.{name}"), "must be finite".to_string());
            }
        }
        if c.c < c.g {
            bad("contract.c", format!("cap {} is below the floor g = {}", c.c, c.g));
        }
        let alpha = c.alpha.expand(years);
        let gamma = c.gamma.expand(years.saturating_sub(1));
        if alpha.len() != years {
            bad("contract.alpha", format!("expected {years} values, got {}", alpha.len()));
        }
        if gamma.len() != years.saturating_sub(1) {
            bad(
                "contract.gamma",
                format!("expected {} values, got {}", years.saturating_sub(1), gamma.len()),
            );
        }
        for (i, a) in alpha.iter().enumerate().take(listed(&c.alpha)) {
            if !(0.0..1.0).contains(a) {
                bad(&indexed("contract.alpha", &c.alpha, i), format!("fee {a} outside [0, 1)"));
            }
        }
        for (i, g) in gamma.iter().enumerate().take(listed(&c.gamma)) {
            if !(0.0..=1.0).contains(g) {
                bad(&indexed("contract.gamma", &c.gamma, i), format!("penalty {g} outside [0, 1]"));
            }
        }
        let contract = ElvaContract {
            maturity: years,
            f0: c.f0,
            g: c.g,
            c: c.c,
            q: c.q,
            alpha,
            gamma,
            omega: c.omega,
        };

        let table = match &self.mortality {
            Some(p) => match MortalityTable::load_csv(p) {
                Ok(t) => Some(t),
                Err(e) => {
                    bad("mortality", format!("{}: {e}", p.display()));
                    None
                }
            },
            None if years > 1 => {
                bad("mortality", "a mortality table is required when maturity > 1".to_string());
                None
            }
            None => Some(MortalityTable::immortal(0)),
        };
        if let Some(t) = &table {
            if let Some(m) = (1..years).find(|&m| !(t.survival(m) > 0.0)) {
                bad("mortality", format!("no survivors left at anniversary {m}"));
            }
        }

        let n = self.effective_numerics();
        let hybrid = if self.method.uses_hybrid() {
            let mut cfg = HybridConfig::default();
            match n.dy {
                Some(dy) if dy > 0.0 && dy.is_finite() => cfg.dy = dy,
                Some(dy) => bad("numerics.dy", format!("space step {dy} must be positive")),
                None => bad("numerics.dy", "required by the hybrid method (or set a preset)".to_string()),
            }
            match n.steps_per_year {
                Some(nt) if nt > 0 => cfg.steps_per_year = nt,
                Some(_) => bad("numerics.steps_per_year", "must be at least 1".to_string()),
                None => bad(
                    "numerics.steps_per_year",
                    "required by the hybrid method (or set a preset)".to_string(),
                ),
            }
            if let Some(w) = n.width_sd {
                if !(w > 0.0) {
                    bad("numerics.width_sd", "must be positive".to_string());
                }
                cfg.width_sd = w;
            }
            if let Some(e) = n.eps {
                if !(e > 0.0) {
                    bad("numerics.eps", "must be positive".to_string());
                }
                cfg.eps = Some(e);
            }
            Some(cfg)
        } else {
            None
        };
        let lsmc = if self.method.uses_lsmc() {
            let mut cfg = LsmcConfig::default();
            match n.n_paths {
                Some(p) if p >= 2 => cfg.n_paths = p,
                Some(_) => bad("numerics.n_paths", "need at least two paths".to_string()),
                None => bad("numerics.n_paths", "required by the lsmc method (or set a preset)".to_string()),
            }
            cfg.seed = n.seed.unwrap_or(cfg.seed);
            cfg.out_of_sample = n.out_of_sample.unwrap_or(false);
            if let Some(d) = n.max_degree {
                if d > MAX_DEGREE {
                    bad("numerics.max_degree", format!("at most {MAX_DEGREE}"));
                }
                cfg.max_degree = d;
            }
            if let Some(p) = n.min_sector_points {
                if p == 0 {
                    bad("numerics.min_sector_points", "must be at least 1".to_string());
                }
                cfg.min_sector_points = p;
            }
            Some(cfg)
        } else {
            None
        };

        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                bad("sweep.values", "no values to sweep".to_string());
            }
            if s.parameter == SweepParameter::AlphaLevy && !matches!(self.model, LevyModel::Nig { .. }) {
                bad("sweep.parameter", "alpha_levy applies to the NIG model only".to_string());
            }
        }
        if let Some(r) = &self.region {
            for (i, &m) in r.anniversaries.iter().enumerate() {
                if m == 0 || m >= years {
                    bad(
                        &format!("region.anniversaries[{i}]"),
                        format!("anniversary {m} outside 1..{}", years.saturating_sub(1)),
                    );
                }
            }
        }

        if !v.is_empty() {
            return Err(v);
        }
        let exp = Experiment {
            method: self.method,
            model: self.model,
            hw,
            contract,
            table: table.expect("checked above"),
            hybrid,
            lsmc,
            echo: self.clone(),
        };
        if let Some(s) = &self.sweep {
            let mut v = Vec::new();
            for (i, &x) in s.values.iter().enumerate() {
                let mut e = exp.clone();
                if let Err(msg) = e.set(s.parameter, x) {
                    v.push(Violation {
                        field: format!("sweep.values[{i}]"),
                        message: msg,
                    });
                }
            }
            if !v.is_empty() {
                return Err(v);
            }
        }
        Ok(exp)
    }
}

/// How many expanded entries to check one by one.
fn listed(value: &PerYear) -> usize {
    match value {
        PerYear::Same(_) => 1,
        PerYear::Each(v) => v.len(),
    }
}

fn indexed(base: &str, value: &PerYear, i: usize) -> String {
    match value {
        PerYear::Same(_) => base.to_string(),
        PerYear::Each(_) => format!("{base}[{i}]"),
    }
}

fn error_field(e: &elva_core::ElvaError) -> Option<&str> {
    match e {
        elva_core::ElvaError::InvalidParameter { name, .. } => Some(name),
        _ => None,
    }
}

/// A validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub method: Method,
    pub model: LevyModel,
    pub hw: HullWhiteParams,
    pub contract: ElvaContract,
    pub table: MortalityTable,
    pub hybrid: Option<HybridConfig>,
    pub lsmc: Option<LsmcConfig>,
    /// The configuration this was resolved from.
    pub echo: ExperimentConfig,
}

impl Experiment {
    /// Changes one parameter, checking its domain.
    pub fn set(&mut self, parameter: SweepParameter, value: f64) -> Result<(), String> {
        match parameter {
            SweepParameter::C => {
                self.contract.c = value;
                self.echo.contract.c = value;
            }
            SweepParameter::G => {
                self.contract.g = value;
                self.echo.contract.g = value;
            }
            SweepParameter::Alpha => {
                self.contract.alpha = vec![value; self.contract.maturity];
                self.echo.contract.alpha = PerYear::Same(value);
            }
            SweepParameter::SigmaHw => {
                self.hw.sigma = value;
                self.echo.rates.sigma = value;
            }
            SweepParameter::KHw => {
                self.hw.k = value;
                self.echo.rates.k = value;
            }
            SweepParameter::AlphaLevy => match &mut self.model {
                LevyModel::Nig { alpha, .. } => {
                    *alpha = value;
                    self.echo.model = self.model;
                }
                _ => return Err("alpha_levy applies to the NIG model only".to_string()),
            },
        }
        self.contract.validate().map_err(|e| e.to_string())?;
        self.hw.validate().map_err(|e| e.to_string())?;
        self.model.validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.echo.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
