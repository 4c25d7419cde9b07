//! JSON persistence of fitted detectors.
//!
//! A kernel PCA model scores new rows against its training rows, which are
//! not stored in the file; loading needs the same training dataset again.

use std::path::Path;

use serde::{Deserialize, Serialize};
use surveykit_core::autoencoder::{AeModel, Architecture};
use surveykit_core::dataset::CategoricalDataset;
use surveykit_core::kpca::{KernelConfig, KpcaModel, KpcaParts};

use crate::error::{AppError, AppResult};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaFile {
    pub gamma: f64,
    pub variance_fraction: f64,
    pub eigenvalues: Vec<f64>,
    pub alphas: Vec<f64>,
    pub positive: usize,
    pub retained: usize,
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
    pub weights: Vec<f64>,
    pub training_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeFile {
    pub input_dim: usize,
    pub widths: [usize; 4],
    pub params: Vec<f64>,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "lowercase")]
pub enum ModelBody {
    Kpca(KpcaFile),
    Ae(AeFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: ModelBody,
}

impl ModelFile {
    pub fn from_kpca(m: &KpcaModel) -> Self {
        let p = m.parts();
        Self {
            schema_version: SCHEMA_VERSION,
            body: ModelBody::Kpca(KpcaFile {
                gamma: p.config.gamma,
                variance_fraction: p.config.variance_fraction,
                eigenvalues: p.eigenvalues.clone(),
                alphas: p.alphas.clone(),
                positive: p.positive,
                retained: p.retained,
                row_means: p.row_means.clone(),
                grand_mean: p.grand_mean,
                weights: p.weights.clone(),
                training_errors: p.training_errors.clone(),
            }),
        }
    }

    pub fn from_ae(m: &AeModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body: ModelBody::Ae(AeFile {
                input_dim: m.architecture().input_dim(),
                widths: m.architecture().widths(),
                params: m.params().to_vec(),
                loss_trace: m.loss_trace().to_vec(),
            }),
        }
    }

    fn check_version(&self) -> AppResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::Model(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    pub fn into_kpca(self, training: CategoricalDataset) -> AppResult<KpcaModel> {
        self.check_version()?;
        let ModelBody::Kpca(k) = self.body else {
            return Err(AppError::Model("file holds an autoencoder, not a kernel PCA model".into()));
        };
        let parts = KpcaParts {
            config: KernelConfig {
                gamma: k.gamma,
                variance_fraction: k.variance_fraction,
            },
            eigenvalues: k.eigenvalues,
            alphas: k.alphas,
            positive: k.positive,
            retained: k.retained,
            row_means: k.row_means,
            grand_mean: k.grand_mean,
            weights: k.weights,
            training_errors: k.training_errors,
        };
        Ok(KpcaModel::from_parts(parts, training)?)
    }

    pub fn into_ae(self) -> AppResult<AeModel> {
        self.check_version()?;
        let ModelBody::Ae(a) = self.body else {
            return Err(AppError::Model("file holds a kernel PCA model, not an autoencoder".into()));
        };
        let arch = Architecture::for_inputs(a.input_dim)?;
        if arch.widths() != a.widths {
            return Err(AppError::Model(format!(
                "layer widths {:?} do not match the architecture for {} inputs",
                a.widths, a.input_dim
            )));
        }
        Ok(AeModel::from_parts(arch, a.params, a.loss_trace)?)
    }
}

pub fn save_model(path: &Path, m: &ModelFile) -> AppResult<()> {
    let text = serde_json::to_string(m)?;
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn load_model(path: &Path) -> AppResult<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
