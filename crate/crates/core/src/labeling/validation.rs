use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::detector::{Detector, ScoreModel};
use super::threshold::{mcc, two_means_1d, Mcc};
use crate::dataset::{CategoricalDataset, NormalizedWeights};
use crate::parallel::map_indexed;
use crate::rng;
use crate::stats::mean_interval;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    LeaveOneOut,
    KFold(usize),
}

/// What is recomputed when one item is left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefitMode {
    /// Refit the detector on the remaining rows, then re-threshold.
    Full,
    /// Keep the full-data scores and only re-threshold the remaining ones.
    ThresholdOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub scheme: Scheme,
    pub mcc_mean: f64,
    pub mcc_ci_low: f64,
    pub mcc_ci_high: f64,
    pub per_iteration: Vec<f64>,
    /// Iterations whose confusion table was degenerate (MCC set to 0).
    pub degenerate: usize,
}

fn report(scheme: Scheme, results: Vec<Mcc>) -> ValidationReport {
    let degenerate = results.iter().filter(|m| m.degenerate).count();
    let per_iteration: Vec<f64> = results.iter().map(|m| m.value).collect();
    let ci = mean_interval(&per_iteration);
    ValidationReport {
        scheme,
        mcc_mean: ci.mean,
        mcc_ci_low: ci.low.clamp(-1.0, 1.0),
        mcc_ci_high: ci.high.clamp(-1.0, 1.0),
        per_iteration,
        degenerate,
    }
}

fn without(n: usize, skip: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != skip).collect()
}

/// Leave-one-out agreement between the full-data labeling and the labeling
/// obtained without each item, measured by MCC on the remaining items.
pub fn stability_validation<D: Detector>(
    detector: &D,
    d: &CategoricalDataset,
    w: &NormalizedWeights,
    mode: RefitMode,
) -> Result<ValidationReport> {
    let all: Vec<usize> = (0..d.n_rows()).collect();
    stability_validation_on(detector, d, w, mode, &all)
}

/// [`stability_validation`] restricted to leaving out the rows in `left_out`,
/// one at a time. Used to bound the cost of full refits on large data.
pub fn stability_validation_on<D: Detector>(
    detector: &D,
    d: &CategoricalDataset,
    w: &NormalizedWeights,
    mode: RefitMode,
    left_out: &[usize],
) -> Result<ValidationReport> {
    let n = d.n_rows();
    if n < 3 {
        return Err(Error::TooFewItems { needed: 3, got: n });
    }
    if left_out.is_empty() {
        return Err(Error::TooFewItems { needed: 1, got: 0 });
    }
    if let Some(&bad) = left_out.iter().find(|&&i| i >= n) {
        return Err(Error::OversizedSample {
            requested: bad + 1,
            available: n,
        });
    }
    let full = detector.fit(d, w)?;
    let reference = two_means_1d(&full.scores)?.labels;
    let results = map_indexed(left_out.len(), |t| -> Result<Mcc> {
        let keep = without(n, left_out[t]);
        let scores = match mode {
            RefitMode::ThresholdOnly => keep.iter().map(|&j| full.scores[j]).collect(),
            RefitMode::Full => detector.fit(&d.subset(&keep)?, &w.restrict(&keep)?)?.scores,
        };
        let labels = two_means_1d(&scores)?.labels;
        let expected: Vec<bool> = keep.iter().map(|&j| reference[j]).collect();
        mcc(&labels, &expected)
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(report(Scheme::LeaveOneOut, results))
}

/// Seeded fold assignment, stratified by `labels` so each fold sees both
/// classes whenever there are enough items of each.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = rng::seeded(seed);
    let mut out = alloc::vec![Vec::new(); folds];
    let mut next = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            out[next % folds].push(i);
            next += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// K-fold check: fit on all folds but one, threshold the training scores,
/// label the held-out fold with that threshold and compare against the
/// full-data labels of the same rows.
pub fn internal_validation<D: Detector>(
    detector: &D,
    d: &CategoricalDataset,
    w: &NormalizedWeights,
    folds: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let n = d.n_rows();
    if folds < 2 || n < folds {
        return Err(Error::TooFewItems {
            needed: folds.max(2),
            got: n,
        });
    }
    let full = detector.fit(d, w)?;
    let reference = two_means_1d(&full.scores)?.labels;
    let assignment = stratified_folds(&reference, folds, seed);
    let results = map_indexed(folds, |f| -> Result<Mcc> {
        let held = &assignment[f];
        let train: Vec<usize> = (0..n).filter(|i| held.binary_search(i).is_err()).collect();
        let fitted = detector.fit(&d.subset(&train)?, &w.restrict(&train)?)?;
        let threshold = two_means_1d(&fitted.scores)?;
        let held_scores = fitted.model.score(&d.subset(held)?)?;
        let labels = threshold.relabel(&held_scores);
        let expected: Vec<bool> = held.iter().map(|&i| reference[i]).collect();
        mcc(&labels, &expected)
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(report(Scheme::KFold(folds), results))
}
