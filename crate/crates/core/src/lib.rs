//! Unsupervised detection of misrepresented subgroups in weighted categorical
//! survey microdata, and Monte Carlo evaluation of integrative sampling
//! strategies (stratified and multi-frame designs).
//!
//! The crate is `no_std` compatible (it needs `alloc`). The default `std`
//! feature only forwards to dependencies; `parallel` runs validation folds,
//! Gram assembly and Monte Carlo replications on the rayon pool. Results are
//! identical with or without it.
//!
//! Module map:
//!
//! - [`dataset`]: category-coded microdata, survey weights, synthetic fixtures
//! - [`entropy`]: per-variable entropy score and category information content
//! - [`kpca`]: Hamming kernel, weighted Gram centering, reconstruction error
//! - [`autoencoder`]: shallow weighted autoencoder trained by backpropagation
//! - [`labeling`]: exact 1-D two-means thresholding, MCC validation,
//!   permutation importance
//! - [`profiling`]: spectral clustering of outliers, silhouette, medoids
//! - [`sampling`]: synthetic population, frames, allocation, SRS and Sampford
//!   designs, STS/SM/PML estimators, Monte Carlo metrics
//! - [`fixtures`]: published EU-SILC marginals and engineered test datasets

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod autoencoder;
pub mod dataset;
pub mod entropy;
mod error;
pub mod fixtures;
pub mod kpca;
pub mod labeling;
mod linalg;
mod math;
mod parallel;
pub mod profiling;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
