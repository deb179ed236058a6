//! Surrender premium of the base NIG contract on the hybrid pricer.
//!
//! cargo run --release -p elva-core --example premium -- 0.01 10 0.01 0.15

use std::time::Instant;

use elva_core::{ElvaContract, HullWhiteParams, HybridConfig, HybridPricer, LevyModel, MortalityTable};

fn main() -> elva_core::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let dy = args.first().copied().unwrap_or(0.01);
    let nt = args.get(1).copied().unwrap_or(10.0) as usize;
    let g = args.get(2).copied().unwrap_or(0.01);
    let c = args.get(3).copied().unwrap_or(0.15);

    let contract = ElvaContract::new(25, 1.0, g, c, 0.01, 0.02, 0.02, 30)?;
    let table = MortalityTable::load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mortality_age30.csv"))?;
    let scale = args.get(4).copied().unwrap_or(1.0);
    let table = MortalityTable::new((1..=table.len()).map(|m| scale * table.mass(m)).collect())?;
    let model = match std::env::var("MODEL").as_deref() {
        Ok("vg") => LevyModel::vg(0.85, 0.0, 0.2)?,
        Ok("cgmy") => LevyModel::cgmy(0.02, 5.0, 15.0, 1.2)?,
        Ok("mjd") => LevyModel::mjd(0.25, 0.6, 0.01, 0.13)?,
        _ => LevyModel::nig(6.0, -0.4, 2.0)?,
    };
    let hw = HullWhiteParams::flat(0.2, 0.03, 0.02)?;

    let start = Instant::now();
    let pricer = HybridPricer::new(&contract, &table, &model, &hw, &HybridConfig::new(dy, nt))?;
    let p = pricer.premium()?;
    println!(
        "grid {} eps {} stencil {} surrender {:.6} no-surrender {:.6} premium {:.6} ({:.1?})",
        pricer.grid().len,
        pricer.jumps().eps,
        pricer.jumps().max_offset,
        p.surrender,
        p.no_surrender,
        p.premium,
        start.elapsed()
    );
    Ok(())
}
