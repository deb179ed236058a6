//! Valuation of equity-linked variable annuities with guaranteed minimum
//! accumulation and death benefits and an optimal surrender right.
//!
//! The fund follows an exponential Lévy process (NIG, VG, CGMY or Merton)
//! and the short rate follows a Hull-White model. Two pricers are provided:
//!
//! - [`hybrid`]: a rate lattice interleaved with IMEX finite-difference steps
//!   of the local PIDE in log-fund space,
//! - [`lsmc`]: Longstaff-Schwartz Monte Carlo with sector-partitioned local
//!   polynomial regression of the continuation value.

pub mod contract;
pub mod error;
pub mod hull_white;
pub mod hybrid;
pub mod levy;
pub mod lsmc;
pub mod quad;
pub mod stats;

pub use contract::{ElvaContract, MortalityTable};
pub use error::{ElvaError, Result};
pub use hull_white::{DiscountCurve, HullWhiteParams, RateTree};
pub use hybrid::{HybridConfig, HybridPricer};
pub use levy::LevyModel;
pub use lsmc::{LsmcConfig, LsmcResult, PathSet};

/// Whether the policyholder may surrender before maturity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrenderMode {
    Surrender,
    NoSurrender,
}
