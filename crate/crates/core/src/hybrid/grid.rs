use serde::{Deserialize, Serialize};

use crate::error::{ElvaError, Result};

/// Uniform grid in `y = ln F` with `ln F0` on a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPriceGrid {
    pub y_min: f64,
    pub dy: f64,
    pub len: usize,
    /// Index of the node at `ln F0`.
    pub origin: usize,
}

impl LogPriceGrid {
    /// `2 * half_nodes + 1` nodes centred at `ln f0`.
    pub fn centred(f0: f64, dy: f64, half_width: f64, max_len: usize) -> Result<Self> {
        if !(dy > 0.0) || !dy.is_finite() {
            return Err(ElvaError::invalid("dy", "space step must be positive"));
        }
        if !(half_width >= 0.0) || !half_width.is_finite() {
            return Err(ElvaError::Geometry(format!("bad grid half-width {half_width}")));
        }
        let half = ((half_width / dy).ceil() as usize).max(1);
        let len = 2 * half + 1;
        if len > max_len {
            return Err(ElvaError::SizeLimit { size: len, max: max_len });
        }
        Ok(Self {
            y_min: f0.ln() - half as f64 * dy,
            dy,
            len,
            origin: half,
        })
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.dy
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.len - 1)
    }

    pub fn funds(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.y(i).exp()).collect()
    }

    /// Linear interpolation of `row` at log-fund `y`, flat outside the grid.
    pub fn interpolate(&self, row: &[f64], y: f64) -> f64 {
        let s = (y - self.y_min) / self.dy;
        if s <= 0.0 {
            return row[0];
        }
        if s >= (self.len - 1) as f64 {
            return row[self.len - 1];
        }
        let i = s.floor() as usize;
        let w = s - i as f64;
        if w == 0.0 {
            row[i]
        } else {
            (1.0 - w) * row[i] + w * row[i + 1]
        }
    }
}
