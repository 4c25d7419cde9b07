use alloc::vec::Vec;

use crate::autoencoder::{self, AeModel, TrainingConfig};
use crate::dataset::{CategoricalDataset, NormalizedWeights};
use crate::kpca::{self, KernelConfig, KpcaModel};
use crate::Result;

/// A fitted scorer plus the scores of the rows it was fitted on.
#[derive(Debug, Clone)]
pub struct Fitted<M> {
    pub model: M,
    pub scores: Vec<f64>,
}

/// A row-level anomaly scoring procedure that can be refitted on subsets.
pub trait Detector: Sync {
    type Model: ScoreModel + Send;

    fn fit(&self, d: &CategoricalDataset, w: &NormalizedWeights) -> Result<Fitted<Self::Model>>;
}

pub trait ScoreModel: Sync {
    /// Scores rows that may not have been seen during fitting.
    fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>>;
}

/// Kernel PCA reconstruction error. Training rows are scored in-sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KpcaDetector {
    pub config: KernelConfig,
}

impl Detector for KpcaDetector {
    type Model = KpcaModel;

    fn fit(&self, d: &CategoricalDataset, w: &NormalizedWeights) -> Result<Fitted<KpcaModel>> {
        let model = kpca::fit(d, w, &self.config)?;
        let scores = model.training_errors().to_vec();
        Ok(Fitted { model, scores })
    }
}

impl ScoreModel for KpcaModel {
    fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>> {
        KpcaModel::score(self, d)
    }
}

/// Autoencoder rounded reconstruction error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AeDetector {
    pub config: TrainingConfig,
}

impl Detector for AeDetector {
    type Model = AeModel;

    fn fit(&self, d: &CategoricalDataset, w: &NormalizedWeights) -> Result<Fitted<AeModel>> {
        let model = autoencoder::train(d, w, &self.config)?;
        let scores = model.score(d)?;
        Ok(Fitted { model, scores })
    }
}

impl ScoreModel for AeModel {
    fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>> {
        AeModel::score(self, d)
    }
}
