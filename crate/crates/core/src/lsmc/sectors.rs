use serde::{Deserialize, Serialize};

use crate::contract::ElvaContract;

/// Largest share of the points a sector may hold before it is split.
pub const MAX_SECTOR_SHARE: f64 = 0.2;

/// Sectors over the fund value: sector `s` covers
/// `[breakpoints[s-1], breakpoints[s])` with open ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorPartition {
    pub breakpoints: Vec<f64>,
    /// Point indices of each sector.
    #[serde(skip)]
    pub members: Vec<Vec<usize>>,
}

impl SectorPartition {
    pub fn sector_of(&self, fund: f64) -> usize {
        self.breakpoints.partition_point(|b| *b <= fund)
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `b1/8, b1/4, b1/2, b1, (b1+b2)/2, b2, 2b2, 4b2, 8b2` with
/// `b1 = F0 e^{gm}`, `b2 = F0 e^{cm}`.
pub fn base_thresholds(contract: &ElvaContract, m: usize) -> Vec<f64> {
    let b1 = contract.floor(m);
    let b2 = contract.cap(m);
    let mut t = vec![
        b1 / 8.0,
        b1 / 4.0,
        b1 / 2.0,
        b1,
        0.5 * (b1 + b2),
        b2,
        2.0 * b2,
        4.0 * b2,
        8.0 * b2,
    ];
    t.dedup();
    t
}

/// Splits the fund axis at the base thresholds, then halves (at the median)
/// any sector holding more than 20% of the points until none does or the
/// points of a sector cannot be separated.
pub fn partition_sectors(funds: &[f64], contract: &ElvaContract, m: usize) -> SectorPartition {
    let base = base_thresholds(contract, m);
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); base.len() + 1];
    for (k, &f) in funds.iter().enumerate() {
        sectors[base.partition_point(|b| *b <= f)].push(k);
    }
    let limit = MAX_SECTOR_SHARE * funds.len() as f64;

    let mut breakpoints = Vec::new();
    let mut members = Vec::new();
    for (s, points) in sectors.into_iter().enumerate() {
        split_into(points, funds, limit, &mut breakpoints, &mut members);
        if s < base.len() {
            breakpoints.push(base[s]);
        }
    }
    SectorPartition {
        breakpoints,
        members,
    }
}

fn split_into(
    mut points: Vec<usize>,
    funds: &[f64],
    limit: f64,
    breakpoints: &mut Vec<f64>,
    members: &mut Vec<Vec<usize>>,
) {
    if (points.len() as f64) <= limit {
        members.push(points);
        return;
    }
    points.sort_by(|&a, &b| funds[a].total_cmp(&funds[b]).then(a.cmp(&b)));
    let median = funds[points[points.len() / 2]];
    let cut = points.partition_point(|&k| funds[k] < median);
    if cut == 0 {
        members.push(points);
        return;
    }
    let upper = points.split_off(cut);
    split_into(points, funds, limit, breakpoints, members);
    breakpoints.push(median);
    split_into(upper, funds, limit, breakpoints, members);
}
