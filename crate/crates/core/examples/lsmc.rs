//! Surrender premium of the base contract by Longstaff-Schwartz.
//!
//! MODEL=vg cargo run --release -p elva-core --example lsmc -- 250000 1 0.01 0.15

use std::time::Instant;

use elva_core::lsmc::{self, LsmcConfig};
use elva_core::{ElvaContract, HullWhiteParams, LevyModel, MortalityTable};

fn main() -> elva_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).map_or(default, |a| a.parse().expect("numeric argument"));
    let n_paths = arg(0, 250_000.0) as usize;
    let seed = arg(1, 1.0) as u64;
    let contract = ElvaContract::new(25, 1.0, arg(2, 0.01), arg(3, 0.15), 0.01, 0.02, 0.02, 30)?;
    let table = MortalityTable::load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mortality_age30.csv"))?;
    let model = match std::env::var("MODEL").as_deref() {
        Ok("vg") => LevyModel::vg(0.85, 0.0, 0.2)?,
        Ok("cgmy") => LevyModel::cgmy(0.02, 5.0, 15.0, 1.2)?,
        Ok("mjd") => LevyModel::mjd(0.25, 0.6, 0.01, 0.13)?,
        _ => LevyModel::nig(6.0, -0.4, 2.0)?,
    };
    let hw = HullWhiteParams::flat(0.2, 0.03, 0.02)?;
    let config = LsmcConfig {
        out_of_sample: std::env::var("OOS").is_ok(),
        ..LsmcConfig::new(n_paths, seed)
    };

    let start = Instant::now();
    let r = lsmc::price(&model, &hw, &contract, &table, &config)?;
    println!(
        "surrender {:.6} no-surrender {:.6} premium {:.6} +- {:.6} ({:.1?})",
        r.surrender.mean,
        r.no_surrender.mean,
        r.premium.mean,
        r.premium.half_width(),
        start.elapsed()
    );
    Ok(())
}
