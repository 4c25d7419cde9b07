use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::detector::{Detector, ScoreModel};
use super::threshold::{accuracy, two_means_1d, OutlierLabeling};
use crate::dataset::{CategoricalDataset, NormalizedWeights};
use crate::parallel::map_indexed;
use crate::rng;
use crate::stats::jackknife_mean_interval;
use crate::{Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 30;

/// A detector fitted on the full data with its threshold and the labels it
/// assigns to the unperturbed rows.
#[derive(Debug, Clone)]
pub struct FittedPipeline<M> {
    pub model: M,
    pub labeling: OutlierLabeling,
    /// `model.score(d)` on the unperturbed data.
    pub scores: Vec<f64>,
    /// `scores` labeled with the fitted boundary.
    pub reference: Vec<bool>,
}

impl<M: ScoreModel> FittedPipeline<M> {
    pub fn fit<D>(detector: &D, d: &CategoricalDataset, w: &NormalizedWeights) -> Result<Self>
    where
        D: Detector<Model = M>,
    {
        let fitted = detector.fit(d, w)?;
        let labeling = two_means_1d(&fitted.scores)?;
        let scores = fitted.model.score(d)?;
        let reference = labeling.relabel(&scores);
        Ok(Self {
            model: fitted.model,
            labeling,
            scores,
            reference,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableImportance {
    pub variable: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub permutations: usize,
    pub variables: Vec<VariableImportance>,
}

impl ImportanceReport {
    /// Variable indices by decreasing mean importance, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.variables.len()).collect();
        idx.sort_by(|&a, &b| {
            self.variables[b]
                .mean
                .total_cmp(&self.variables[a].mean)
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Shuffles one column at a time and measures how many labels flip.
///
/// Importance of a replicate is `1 - accuracy(new labels, reference labels)`.
/// Only rows whose code actually changed are rescored.
pub fn permutation_importance<M: ScoreModel>(
    pipeline: &FittedPipeline<M>,
    d: &CategoricalDataset,
    reps: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if reps < 2 {
        return Err(Error::TooFewItems {
            needed: 2,
            got: reps,
        });
    }
    if pipeline.scores.len() != d.n_rows() {
        return Err(Error::LengthMismatch {
            left: pipeline.scores.len(),
            right: d.n_rows(),
        });
    }
    let p = d.n_vars();
    let tasks = map_indexed(p * reps, |t| -> Result<f64> {
        let (v, r) = (t / reps, t % reps);
        let original: Vec<u32> = d.column(v).collect();
        let mut shuffled = original.clone();
        let mut rng = rng::seeded(rng::derive_seed(seed, &[v as u64, r as u64]));
        shuffled.shuffle(&mut rng);
        let changed: Vec<usize> = (0..original.len())
            .filter(|&i| original[i] != shuffled[i])
            .collect();
        let mut scores = pipeline.scores.clone();
        if !changed.is_empty() {
            let permuted = d.with_column(v, &shuffled)?.subset(&changed)?;
            let fresh = pipeline.model.score(&permuted)?;
            for (&i, s) in changed.iter().zip(fresh) {
                scores[i] = s;
            }
        }
        let labels = pipeline.labeling.relabel(&scores);
        Ok(1.0 - accuracy(&labels, &pipeline.reference)?)
    });
    let values = tasks.into_iter().collect::<Result<Vec<f64>>>()?;
    let variables = (0..p)
        .map(|v| {
            let replicates = values[v * reps..(v + 1) * reps].to_vec();
            let ci = jackknife_mean_interval(&replicates);
            VariableImportance {
                variable: d.specs()[v].name().to_string(),
                mean: ci.mean,
                ci_low: ci.low.clamp(0.0, 1.0),
                ci_high: ci.high.clamp(0.0, 1.0),
                replicates,
            }
        })
        .collect();
    Ok(ImportanceReport {
        permutations: reps,
        variables,
    })
}
