//! Per-variable entropy score and category information content.
//!
//! For a variable with observed category frequencies `p_1..p_k` (zero
//! frequencies excluded from `k`), the score is
//!
//! ```text
//! gamma1 = 1 + (1 / ln k) * sum_i p_i ln p_i
//! ```
//!
//! It is 0 for a uniform distribution and tends to 1 as the mass concentrates
//! on one category. Frequencies are survey-weighted.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{CategoricalDataset, NormalizedWeights};
use crate::math;
use crate::stats::compensated_sum;
use crate::{Error, Result};

/// Weighted frequency of each declared category of `variable`.
pub fn weighted_frequencies(
    d: &CategoricalDataset,
    w: &NormalizedWeights,
    variable: usize,
) -> Result<Vec<f64>> {
    if variable >= d.n_vars() {
        return Err(Error::BadVariableIndex {
            index: variable,
            count: d.n_vars(),
        });
    }
    if w.len() != d.n_rows() {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: d.n_rows(),
        });
    }
    let k = d.specs()[variable].category_count();
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (code, &wj) in d.column(variable).zip(w.as_slice()) {
        buckets[code as usize].push(wj);
    }
    Ok(buckets
        .into_iter()
        .map(|b| compensated_sum(b.into_iter()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma1 {
    pub score: f64,
    /// Categories with nonzero frequency.
    pub observed: usize,
    /// Fewer than two observed categories; `score` is then 1 by convention.
    pub degenerate: bool,
}

pub fn gamma1(freqs: &[f64]) -> Gamma1 {
    let observed = freqs.iter().filter(|&&p| p > 0.0).count();
    if observed < 2 {
        return Gamma1 {
            score: 1.0,
            observed,
            degenerate: true,
        };
    }
    let plogp = compensated_sum(
        freqs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * math::ln(p)),
    );
    let score = 1.0 + plogp / math::ln(observed as f64);
    Gamma1 {
        score: score.clamp(0.0, 1.0),
        observed,
        degenerate: false,
    }
}

/// `-ln p` per category, in nats. Unobserved categories get `+inf`.
pub fn information_content(freqs: &[f64]) -> Vec<f64> {
    freqs
        .iter()
        .map(|&p| {
            if p > 0.0 {
                // ln(1) is exactly 0 but guard the sign of -0.0
                (-math::ln(p)).max(0.0)
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryInfo {
    pub label: String,
    pub freq: f64,
    pub info_nats: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableEntropy {
    pub variable: String,
    pub gamma1: Gamma1,
    pub categories: Vec<CategoryInfo>,
}

impl VariableEntropy {
    /// The observed category with the highest information content.
    pub fn rarest(&self) -> Option<&CategoryInfo> {
        self.categories
            .iter()
            .filter(|c| c.freq > 0.0)
            .max_by(|a, b| a.info_nats.total_cmp(&b.info_nats))
    }
}

/// Scores every variable of `d`.
pub fn entropy_report(d: &CategoricalDataset, w: &NormalizedWeights) -> Result<Vec<VariableEntropy>> {
    (0..d.n_vars())
        .map(|j| {
            let freqs = weighted_frequencies(d, w, j)?;
            let info = information_content(&freqs);
            let spec = &d.specs()[j];
            Ok(VariableEntropy {
                variable: spec.name().to_string(),
                gamma1: gamma1(&freqs),
                categories: spec
                    .categories()
                    .iter()
                    .zip(freqs.iter().zip(info))
                    .map(|(label, (&freq, info_nats))| CategoryInfo {
                        label: label.clone(),
                        freq,
                        info_nats,
                    })
                    .collect(),
            })
        })
        .collect()
}
