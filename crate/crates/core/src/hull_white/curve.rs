use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{ElvaError, Result};

/// Initial zero-coupon curve `P^M(0, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscountCurve {
    Flat { rate: f64 },
    /// Log-linear interpolation of zero-coupon prices; `(0, 1)` is implied.
    Tabulated {
        maturities: Vec<f64>,
        prices: Vec<f64>,
    },
}

/// Step of the central difference used for tabulated forward rates.
const FORWARD_STEP: f64 = 1.0 / 365.0;

impl DiscountCurve {
    pub fn tabulated(maturities: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if maturities.len() != prices.len() || maturities.is_empty() {
            return Err(ElvaError::invalid(
                "curve",
                "need equally many maturities and prices",
            ));
        }
        let mut prev = 0.0;
        for (i, (&t, &p)) in maturities.iter().zip(&prices).enumerate() {
            if !(t > prev) {
                return Err(ElvaError::TableRow {
                    row: i + 1,
                    reason: format!("maturity {t} not strictly increasing"),
                });
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(ElvaError::TableRow {
                    row: i + 1,
                    reason: format!("zero-coupon price {p} must be positive"),
                });
            }
            prev = t;
        }
        Ok(Self::Tabulated { maturities, prices })
    }

    /// Reads `maturity_years,zcb_price` rows (header required).
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut maturities = Vec::new();
        let mut prices = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |idx: usize| -> Result<f64> {
                rec.get(idx)
                    .ok_or_else(|| ElvaError::TableRow {
                        row: i + 1,
                        reason: "expected two columns".to_string(),
                    })?
                    .parse::<f64>()
                    .map_err(|e| ElvaError::TableRow {
                        row: i + 1,
                        reason: e.to_string(),
                    })
            };
            maturities.push(parse(0)?);
            prices.push(parse(1)?);
        }
        Self::tabulated(maturities, prices)
    }

    /// `ln P(0, t)`.
    pub fn log_discount(&self, t: f64) -> f64 {
        match self {
            Self::Flat { rate } => -rate * t,
            Self::Tabulated { maturities, prices } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let idx = maturities.partition_point(|m| *m < t);
                let (t0, l0, t1, l1) = if idx == 0 {
                    (0.0, 0.0, maturities[0], prices[0].ln())
                } else if idx >= maturities.len() {
                    // flat extrapolation of the last forward rate
                    let n = maturities.len();
                    if n == 1 {
                        (0.0, 0.0, maturities[0], prices[0].ln())
                    } else {
                        (
                            maturities[n - 2],
                            prices[n - 2].ln(),
                            maturities[n - 1],
                            prices[n - 1].ln(),
                        )
                    }
                } else {
                    (
                        maturities[idx - 1],
                        prices[idx - 1].ln(),
                        maturities[idx],
                        prices[idx].ln(),
                    )
                };
                l0 + (l1 - l0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn zcb(&self, t: f64) -> f64 {
        self.log_discount(t).exp()
    }

    /// Instantaneous forward rate `-d ln P(0, t) / dt`.
    pub fn forward(&self, t: f64) -> f64 {
        match self {
            Self::Flat { rate } => *rate,
            Self::Tabulated { .. } => {
                let h = FORWARD_STEP;
                if t < h {
                    -(self.log_discount(t + h) - self.log_discount(t)) / h
                } else {
                    -(self.log_discount(t + h) - self.log_discount(t - h)) / (2.0 * h)
                }
            }
        }
    }
}
