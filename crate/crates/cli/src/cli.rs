use std::path::PathBuf;

use clap::{Args as ClapArgs, Parser, Subcommand};

use crate::config::{ExperimentConfig, Method, Overrides, Preset, SweepParameter, SweepSection};
use crate::error::CliError;
use crate::run;

#[derive(Debug, Parser)]
#[command(name = "elva", version, about = "Surrender premia of guaranteed variable annuities")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, ClapArgs)]
pub struct Common {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Numerical resolution profile.
    #[arg(long, global = true, value_enum, ignore_case = true)]
    pub preset: Option<Preset>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (all cores when omitted).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Price with and without surrender and report the premium.
    Price,
    /// Premium over a list of values of one parameter.
    Sweep {
        /// c, g, alpha, sigma_HW, k_HW or alpha_levy.
        #[arg(long)]
        parameter: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Export the optimal surrender region of the hybrid solution.
    Region {
        /// Anniversaries, e.g. 5,10,15,20.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<usize>>,
    },
    /// Check an experiment file without pricing.
    Validate,
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        preset: common.preset,
        method: common.method,
        seed: common.seed,
        out: common.out.clone(),
    });
    Ok(cfg)
}

fn parse_parameter(name: &str) -> Result<SweepParameter, CliError> {
    toml::Value::String(name.to_string())
        .try_into()
        .map_err(|_| CliError::Invalid(vec![crate::config::Violation {
            field: "sweep.parameter".to_string(),
            message: format!("unknown parameter `{name}`"),
        }]))
}

/// Runs a command and returns the process exit code.
pub fn execute(args: &Args) -> i32 {
    if let Some(n) = args.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return 3;
        }
    }
    match dispatch(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(args: &Args) -> Result<i32, CliError> {
    let mut cfg = load(&args.common)?;
    match &args.command {
        Command::Validate => {
            cfg.resolve().map_err(CliError::Invalid)?;
            println!("ok");
            Ok(0)
        }
        Command::Price => {
            let exp = cfg.resolve().map_err(CliError::Invalid)?;
            let out = run::price(&exp)?;
            let path = exp.output_dir().join("price.json");
            run::write_json(&path, &out)?;
            println!("{}", serde_json::to_string_pretty(&out).expect("records serialize"));
            Ok(0)
        }
        Command::Sweep { parameter, values } => {
            if parameter.is_some() || values.is_some() {
                let current = cfg.sweep.clone();
                let parameter = match parameter {
                    Some(p) => parse_parameter(p)?,
                    None => current.as_ref().map(|s| s.parameter).unwrap_or(SweepParameter::C),
                };
                let values = values
                    .clone()
                    .or_else(|| current.map(|s| s.values))
                    .unwrap_or_default();
                cfg.sweep = Some(SweepSection { parameter, values });
            }
            let Some(sweep) = cfg.sweep.clone() else {
                return Err(CliError::Invalid(vec![crate::config::Violation {
                    field: "sweep".to_string(),
                    message: "no sweep given".to_string(),
                }]));
            };
            let exp = cfg.resolve().map_err(CliError::Invalid)?;
            let rows = run::sweep(&exp, sweep.parameter, &sweep.values);
            let path = exp.output_dir().join(format!("sweep_{}.csv", sweep.parameter));
            run::write_sweep_csv(&path, sweep.parameter, &rows)?;
            for r in &rows {
                match (&r.premium, &r.error) {
                    (Some(p), _) => println!("{} = {}: premium {p:.6}", sweep.parameter, r.value),
                    (None, Some(e)) => eprintln!("{} = {}: failed: {e}", sweep.parameter, r.value),
                    _ => {}
                }
            }
            println!("{}", path.display());
            Ok(if rows.iter().all(|r| r.error.is_some()) { 3 } else { 0 })
        }
        Command::Region { at } => {
            if let Some(at) = at {
                cfg.region = Some(crate::config::RegionSection {
                    anniversaries: at.clone(),
                });
            }
            if cfg.method != Method::Hybrid {
                return Err(CliError::Invalid(vec![crate::config::Violation {
                    field: "method".to_string(),
                    message: "exercise regions come from the hybrid method".to_string(),
                }]));
            }
            let anniversaries = cfg.region.as_ref().map(|r| r.anniversaries.clone()).unwrap_or_default();
            if anniversaries.is_empty() {
                return Err(CliError::Invalid(vec![crate::config::Violation {
                    field: "region.anniversaries".to_string(),
                    message: "no anniversaries requested".to_string(),
                }]));
            }
            let exp = cfg.resolve().map_err(CliError::Invalid)?;
            let dir = exp.output_dir();
            for region in run::regions(&exp, &anniversaries)? {
                let path = run::write_region_csv(&dir, &region)?;
                println!("{} ({} of {} nodes)", path.display(), region.count(), region.funds.len() * region.rates.len());
            }
            Ok(0)
        }
    }
}
