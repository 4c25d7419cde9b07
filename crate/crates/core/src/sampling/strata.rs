//! Percentile strata on the design variable.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strata {
    /// Stratum of every unit, `0..q`.
    pub ids: Vec<usize>,
    pub sizes: Vec<usize>,
    /// A cut point falls inside a run of tied `x` values; ties were broken by
    /// unit index.
    pub degenerate: bool,
}

impl Strata {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Unit indices of stratum `h`, ascending.
    pub fn members(&self, h: usize) -> Vec<usize> {
        self.ids
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == h)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Cut positions in the sorted order: `round(N * floor(100 j / q) / 100)`.
pub fn cut_points(n: usize, q: usize) -> Vec<usize> {
    (1..q)
        .map(|j| {
            let pct = math::floor(100.0 * j as f64 / q as f64);
            math::round(n as f64 * pct / 100.0) as usize
        })
        .collect()
}

/// Splits units into `q` strata at the empirical percentiles of `x`
/// (33rd and 66th for `q = 3`).
pub fn stratify(x: &[f64], q: usize) -> Result<Strata> {
    if q == 0 {
        return Err(Error::InvalidConfig("need at least one stratum".into()));
    }
    if x.len() < q {
        return Err(Error::TooFewItems { needed: q, got: x.len() });
    }
    let order = sorted_order(x);
    let cuts = cut_points(x.len(), q);
    let mut ids = vec![0; x.len()];
    let mut sizes = vec![0; q];
    let mut h = 0;
    for (pos, &unit) in order.iter().enumerate() {
        while h < cuts.len() && pos >= cuts[h] {
            h += 1;
        }
        ids[unit] = h;
        sizes[h] += 1;
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidConfig("a stratum is empty".into()));
    }
    let degenerate = cuts
        .iter()
        .any(|&c| c > 0 && c < x.len() && x[order[c - 1]] == x[order[c]]);
    Ok(Strata { ids, sizes, degenerate })
}

/// Unit indices sorted by `x`, ties by index.
pub(crate) fn sorted_order(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    order
}
