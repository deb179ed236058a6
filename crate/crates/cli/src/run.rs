use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use elva_core::hybrid::ExerciseRegion;
use elva_core::lsmc;
use elva_core::stats::Z_99;
use elva_core::{HybridPricer, SurrenderMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig, Method, SweepParameter};
use crate::error::CliError;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One priced contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: Method,
    pub input: ExperimentConfig,
    pub price_surrender: f64,
    pub price_no_surrender: f64,
    /// Always `price_surrender - price_no_surrender`.
    pub premium: f64,
    /// 99% interval of the premium from per-path differences.
    pub ci: Option<[f64; 2]>,
    pub std_error: Option<f64>,
    pub wall_clock_s: f64,
    pub engine_version: String,
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub pricing_stream: Option<u64>,
}

impl ResultRecord {
    fn new(method: Method, exp: &Experiment, surrender: f64, no_surrender: f64, seconds: f64) -> Self {
        Self {
            method,
            input: exp.echo.clone(),
            price_surrender: surrender,
            price_no_surrender: no_surrender,
            premium: surrender - no_surrender,
            ci: None,
            std_error: None,
            wall_clock_s: seconds,
            engine_version: ENGINE_VERSION.to_string(),
            seed: None,
            n_paths: None,
            pricing_stream: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceOutput {
    pub records: Vec<ResultRecord>,
    /// Whether the hybrid premium lies in the LSMC interval (both methods only).
    pub agreement: Option<bool>,
}

pub fn run_hybrid(exp: &Experiment) -> Result<ResultRecord, CliError> {
    let cfg = exp.hybrid.as_ref().expect("hybrid numerics resolved");
    let start = Instant::now();
    let pricer = HybridPricer::new(&exp.contract, &exp.table, &exp.model, &exp.hw, cfg)
        .map_err(CliError::engine("building the hybrid pricer"))?;
    let p = pricer.premium().map_err(CliError::engine("hybrid pricing"))?;
    Ok(ResultRecord::new(
        Method::Hybrid,
        exp,
        p.surrender,
        p.no_surrender,
        start.elapsed().as_secs_f64(),
    ))
}

pub fn run_lsmc(exp: &Experiment) -> Result<ResultRecord, CliError> {
    let cfg = exp.lsmc.as_ref().expect("lsmc numerics resolved");
    let start = Instant::now();
    let r = lsmc::price(&exp.model, &exp.hw, &exp.contract, &exp.table, cfg)
        .map_err(CliError::engine("lsmc pricing"))?;
    let mut rec = ResultRecord::new(
        Method::Lsmc,
        exp,
        r.surrender.mean,
        r.no_surrender.mean,
        start.elapsed().as_secs_f64(),
    );
    let half = Z_99 * r.premium.std_error;
    rec.ci = Some([rec.premium - half, rec.premium + half]);
    rec.std_error = Some(r.premium.std_error);
    rec.seed = Some(r.seed);
    rec.n_paths = Some(r.n_paths);
    rec.pricing_stream = Some(r.pricing_stream);
    Ok(rec)
}

pub fn price(exp: &Experiment) -> Result<PriceOutput, CliError> {
    let mut records = Vec::new();
    if exp.method.uses_hybrid() {
        records.push(run_hybrid(exp)?);
    }
    if exp.method.uses_lsmc() {
        records.push(run_lsmc(exp)?);
    }
    let agreement = match records.as_slice() {
        [h, l] => l.ci.map(|[lo, hi]| lo <= h.premium && h.premium <= hi),
        _ => None,
    };
    Ok(PriceOutput { records, agreement })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub method: Method,
    pub premium: Option<f64>,
    pub runtime_s: f64,
    pub error: Option<String>,
}

/// Prices every value of the sweep with otherwise identical inputs. Failed
/// points are kept as rows carrying the error.
pub fn sweep(exp: &Experiment, parameter: SweepParameter, values: &[f64]) -> Vec<SweepRow> {
    let methods: Vec<Method> = [Method::Hybrid, Method::Lsmc]
        .into_iter()
        .filter(|m| match m {
            Method::Hybrid => exp.method.uses_hybrid(),
            _ => exp.method.uses_lsmc(),
        })
        .collect();
    let points: Vec<(f64, Method)> = values
        .iter()
        .flat_map(|&v| methods.iter().map(move |&m| (v, m)))
        .collect();
    points
        .par_iter()
        .map(|&(value, method)| {
            let start = Instant::now();
            let mut e = exp.clone();
            let outcome = e
                .set(parameter, value)
                .map_err(|msg| msg.to_string())
                .and_then(|()| {
                    match method {
                        Method::Hybrid => run_hybrid(&e),
                        _ => run_lsmc(&e),
                    }
                    .map_err(|err| err.to_string())
                });
            SweepRow {
                value,
                method,
                premium: outcome.as_ref().ok().map(|r| r.premium),
                runtime_s: start.elapsed().as_secs_f64(),
                error: outcome.err(),
            }
        })
        .collect()
}

/// Surrender regions of the hybrid solution at the given anniversaries.
pub fn regions(exp: &Experiment, anniversaries: &[usize]) -> Result<Vec<ExerciseRegion>, CliError> {
    let cfg = exp.hybrid.as_ref().expect("hybrid numerics resolved");
    let pricer = HybridPricer::new(&exp.contract, &exp.table, &exp.model, &exp.hw, cfg)
        .map_err(CliError::engine("building the hybrid pricer"))?;
    let r = pricer
        .run(SurrenderMode::Surrender, anniversaries)
        .map_err(CliError::engine("hybrid pricing"))?;
    Ok(r.regions)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io(path)(e.into()))?;
    writeln!(w).and_then(|()| w.flush()).map_err(io(path))
}

pub fn write_sweep_csv(path: &Path, parameter: SweepParameter, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut out = format!("{parameter},premium,method,runtime_s,error\n");
    for r in rows {
        let method = match r.method {
            Method::Hybrid => "hybrid",
            Method::Lsmc => "lsmc",
            Method::Both => "both",
        };
        out.push_str(&format!(
            "{:.16e},{},{method},{:.3},{}\n",
            r.value,
            r.premium.map(|p| format!("{p:.16e}")).unwrap_or_default(),
            r.runtime_s,
            r.error.as_deref().map(csv_quote).unwrap_or_default()
        ));
    }
    w.write_all(out.as_bytes()).and_then(|()| w.flush()).map_err(io(path))
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
}

/// Writes `region_mNN.csv` with one `(fund, rate, surrender_optimal)` row per
/// grid node.
pub fn write_region_csv(dir: &Path, region: &ExerciseRegion) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("region_m{:02}.csv", region.anniversary));
    let mut w = create(&path)?;
    let mut out = String::from("fund,rate,surrender_optimal\n");
    for (j, rate) in region.rates.iter().enumerate() {
        for (i, fund) in region.funds.iter().enumerate() {
            out.push_str(&format!(
                "{fund:.16e},{rate:.16e},{}\n",
                u8::from(region.surrender[j][i])
            ));
        }
    }
    w.write_all(out.as_bytes()).and_then(|()| w.flush()).map_err(io(&path))?;
    Ok(path)
}
