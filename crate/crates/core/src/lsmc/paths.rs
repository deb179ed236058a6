use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contract::ElvaContract;
use crate::error::{ElvaError, Result};
use crate::hull_white::{HullWhiteParams, RateStepper};
use crate::levy::{IncrementSampler, LevyModel};

/// Paths per random stream.
pub const PATH_CHUNK: usize = 1024;

/// Anniversary samples of the fund, the short rate and the integrated rate,
/// stored as `values[m][k]` for `m = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub fund: Vec<Vec<f64>>,
    pub rate: Vec<Vec<f64>>,
    pub integral: Vec<Vec<f64>>,
    pub seed: u64,
    /// First ChaCha stream used; chunk `c` draws from stream `stream_base + c`.
    pub stream_base: u64,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.fund[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn years(&self) -> usize {
        self.fund.len() - 1
    }

    /// Builds a path set from explicit values (small hand-made examples).
    pub fn from_values(fund: Vec<Vec<f64>>, rate: Vec<Vec<f64>>, integral: Vec<Vec<f64>>) -> Result<Self> {
        let n = fund.first().map_or(0, Vec::len);
        let shape_ok = fund.len() >= 2
            && rate.len() == fund.len()
            && integral.len() == fund.len()
            && fund.iter().chain(&rate).chain(&integral).all(|v| v.len() == n);
        if !shape_ok || n == 0 {
            return Err(ElvaError::invalid("paths", "inconsistent path array shapes"));
        }
        if fund.iter().flatten().any(|f| !(*f > 0.0)) {
            return Err(ElvaError::invalid("paths", "fund values must be positive"));
        }
        Ok(Self {
            fund,
            rate,
            integral,
            seed: 0,
            stream_base: 0,
        })
    }
}

/// Simulates `n_paths` anniversary paths of `(F, r, I)`.
pub fn simulate_paths(
    model: &LevyModel,
    hw: &HullWhiteParams,
    contract: &ElvaContract,
    n_paths: usize,
    seed: u64,
) -> Result<PathSet> {
    simulate_paths_from_stream(model, hw, contract, n_paths, seed, 0)
}

pub fn simulate_paths_from_stream(
    model: &LevyModel,
    hw: &HullWhiteParams,
    contract: &ElvaContract,
    n_paths: usize,
    seed: u64,
    stream_base: u64,
) -> Result<PathSet> {
    if n_paths == 0 {
        return Err(ElvaError::invalid("n_paths", "need at least one path"));
    }
    contract.validate()?;
    hw.validate()?;
    let years = contract.maturity;
    let sampler = IncrementSampler::new(model, 1.0)?;
    let correction = model.martingale_correction()?;
    let stepper = RateStepper::new(hw, years);
    let drift: Vec<f64> = (0..years)
        .map(|m| correction - contract.effective_dividend(m))
        .collect();
    let log_f0 = contract.f0.ln();

    let chunks: Vec<(usize, usize)> = (0..n_paths)
        .step_by(PATH_CHUNK)
        .map(|s| (s, (s + PATH_CHUNK).min(n_paths)))
        .collect();
    let blocks: Vec<[Vec<Vec<f64>>; 3]> = chunks
        .par_iter()
        .enumerate()
        .map(|(c, &(start, end))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + c as u64);
            let width = end - start;
            let mut fund = vec![vec![0.0; width]; years + 1];
            let mut rate = vec![vec![0.0; width]; years + 1];
            let mut integral = vec![vec![0.0; width]; years + 1];
            for k in 0..width {
                let mut factor = 0.0;
                let mut log_f = log_f0;
                fund[0][k] = contract.f0;
                rate[0][k] = stepper.initial_rate();
                for m in 0..years {
                    let (f, r, di) = stepper.step(m, factor, &mut rng);
                    factor = f;
                    log_f += di + drift[m] + sampler.sample(&mut rng);
                    fund[m + 1][k] = log_f.exp();
                    rate[m + 1][k] = r;
                    integral[m + 1][k] = integral[m][k] + di;
                }
            }
            [fund, rate, integral]
        })
        .collect();

    let mut out = [
        vec![Vec::with_capacity(n_paths); years + 1],
        vec![Vec::with_capacity(n_paths); years + 1],
        vec![Vec::with_capacity(n_paths); years + 1],
    ];
    for block in blocks {
        for (dst, src) in out.iter_mut().zip(block) {
            for (d, s) in dst.iter_mut().zip(src) {
                d.extend(s);
            }
        }
    }
    let [fund, rate, integral] = out;
    if fund.iter().flatten().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(ElvaError::Numerical("simulated fund left (0, inf)".to_string()));
    }
    Ok(PathSet {
        fund,
        rate,
        integral,
        seed,
        stream_base,
    })
}
