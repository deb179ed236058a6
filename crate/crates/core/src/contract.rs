//! Contract mechanics: fund fees, death and surrender benefits, mortality.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{ElvaError, Result};

/// Equity-linked variable annuity with a GMAB/GMDB collar and an optional
/// surrender right at anniversaries `1..M-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElvaContract {
    /// Maturity in years.
    pub maturity: usize,
    /// Initial premium, fully invested in the fund.
    pub f0: f64,
    /// Guaranteed minimum growth rate.
    pub g: f64,
    /// Maximum growth rate.
    pub c: f64,
    /// Dividend yield of the underlying.
    pub q: f64,
    /// Fee rates `alpha_m`, `m = 0..M-1`, charged over `[m, m+1]`.
    pub alpha: Vec<f64>,
    /// Surrender penalties `gamma_m`, `m = 1..M-1` (stored at index `m - 1`).
    pub gamma: Vec<f64>,
    /// Age at inception.
    pub omega: u32,
}

impl ElvaContract {
    /// Contract with constant fee and penalty schedules.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        maturity: usize,
        f0: f64,
        g: f64,
        c: f64,
        q: f64,
        alpha: f64,
        gamma: f64,
        omega: u32,
    ) -> Result<Self> {
        let contract = Self {
            maturity,
            f0,
            g,
            c,
            q,
            alpha: vec![alpha; maturity],
            gamma: vec![gamma; maturity.saturating_sub(1)],
            omega,
        };
        contract.validate()?;
        Ok(contract)
    }

    pub fn validate(&self) -> Result<()> {
        if self.maturity == 0 {
            return Err(ElvaError::invalid("M", "maturity must be at least one year"));
        }
        if !(self.f0 > 0.0) || !self.f0.is_finite() {
            return Err(ElvaError::invalid("F0", "initial premium must be positive"));
        }
        if !self.g.is_finite() || !self.c.is_finite() || !self.q.is_finite() {
            return Err(ElvaError::invalid("g/c/q", "must be finite"));
        }
        if self.c < self.g {
            return Err(ElvaError::invalid("c", "growth cap must be at least the floor g"));
        }
        if self.alpha.len() != self.maturity {
            return Err(ElvaError::invalid(
                "alpha",
                format!("expected {} fee rates, got {}", self.maturity, self.alpha.len()),
            ));
        }
        if self.gamma.len() != self.maturity - 1 {
            return Err(ElvaError::invalid(
                "gamma",
                format!(
                    "expected {} penalties, got {}",
                    self.maturity - 1,
                    self.gamma.len()
                ),
            ));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(ElvaError::invalid("alpha", format!("fee {a} outside [0, 1)")));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(ElvaError::invalid("gamma", format!("penalty {g} outside [0, 1]")));
        }
        Ok(())
    }

    /// Same contract with the surrender benefit switched off (`gamma = 1`).
    pub fn without_surrender(&self) -> Self {
        Self {
            gamma: vec![1.0; self.gamma.len()],
            ..self.clone()
        }
    }

    pub fn floor(&self, m: usize) -> f64 {
        self.f0 * (self.g * m as f64).exp()
    }

    pub fn cap(&self, m: usize) -> f64 {
        self.f0 * (self.c * m as f64).exp()
    }

    /// `DB_m(F) = max(F0 e^{gm}, min(F0 e^{cm}, F))`.
    pub fn death_benefit(&self, m: usize, fund: f64) -> f64 {
        self.floor(m).max(self.cap(m).min(fund))
    }

    /// Penalty at anniversary `m` (`1 <= m < M`).
    pub fn penalty(&self, m: usize) -> f64 {
        self.gamma[m - 1]
    }

    /// `SB_m(F) = (1 - gamma_m) min(F0 e^{cm}, F)` before maturity, `DB_M` at it.
    pub fn surrender_benefit(&self, m: usize, fund: f64) -> f64 {
        if m >= self.maturity {
            self.death_benefit(self.maturity, fund)
        } else {
            (1.0 - self.penalty(m)) * self.cap(m).min(fund)
        }
    }

    /// Dividend yield with fees folded in over `[m, m+1]`: `q - ln(1 - alpha_m)`.
    pub fn effective_dividend(&self, m: usize) -> f64 {
        self.q - (-self.alpha[m]).ln_1p()
    }
}

/// Death probability masses `p_m` of the interval `(omega + m - 1, omega + m]`
/// for a policyholder aged `omega` at inception.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MortalityTable {
    masses: Vec<f64>,
}

const MASS_TOLERANCE: f64 = 1e-12;

impl MortalityTable {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        let mut cum = 0.0;
        for (i, &p) in masses.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(ElvaError::TableRow {
                    row: i + 1,
                    reason: format!("negative or invalid death probability {p}"),
                });
            }
            cum += p;
            if cum > 1.0 + MASS_TOLERANCE {
                return Err(ElvaError::TableRow {
                    row: i + 1,
                    reason: format!("cumulative death probability {cum} exceeds 1"),
                });
            }
        }
        Ok(Self { masses })
    }

    /// Table with no deaths over `len` years.
    pub fn immortal(len: usize) -> Self {
        Self {
            masses: vec![0.0; len],
        }
    }

    /// Reads `m,p_m` rows (header required, `m = 1, 2, ...` in order).
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut masses = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 1;
            let field = |idx: usize| -> Result<&str> {
                rec.get(idx).ok_or_else(|| ElvaError::TableRow {
                    row,
                    reason: "expected two columns (m, p_m)".to_string(),
                })
            };
            let m: usize = field(0)?.parse().map_err(|e| ElvaError::TableRow {
                row,
                reason: format!("bad interval index: {e}"),
            })?;
            if m != row {
                return Err(ElvaError::TableRow {
                    row,
                    reason: format!("expected interval {row}, found {m}"),
                });
            }
            let p: f64 = field(1)?.parse().map_err(|e| ElvaError::TableRow {
                row,
                reason: format!("bad probability: {e}"),
            })?;
            masses.push(p);
        }
        Self::new(masses)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// `p_m`, zero beyond the table.
    pub fn mass(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.masses.get(m - 1).copied().unwrap_or(0.0)
        }
    }

    /// Probability of being alive at anniversary `m`.
    pub fn survival(&self, m: usize) -> f64 {
        1.0 - self.masses.iter().take(m).sum::<f64>()
    }

    /// Death probability in interval `m` given survival to `m - 1`.
    pub fn conditional_death_prob(&self, m: usize) -> Result<f64> {
        let alive = self.survival(m - 1);
        if !(alive > 0.0) {
            return Err(ElvaError::DegenerateSurvival { interval: m });
        }
        Ok((self.mass(m) / alive).min(1.0))
    }
}
