//! Score thresholding, MCC-based validation and permutation importance.
//!
//! Scores become labels through an exact two-cluster split of the real line;
//! the cluster with the higher centroid is atypical.

mod detector;
mod importance;
mod threshold;
mod validation;

pub use detector::{AeDetector, Detector, Fitted, KpcaDetector, ScoreModel};
pub use importance::{
    permutation_importance, FittedPipeline, ImportanceReport, VariableImportance,
    DEFAULT_PERMUTATIONS,
};
pub use threshold::{accuracy, mcc, two_means_1d, Mcc, OutlierLabeling};
pub use validation::{
    internal_validation, stability_validation, stability_validation_on, stratified_folds, RefitMode, Scheme,
    ValidationReport,
};
