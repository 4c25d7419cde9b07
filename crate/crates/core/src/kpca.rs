//! Kernel PCA on categorical rows with a Hamming kernel.
//!
//! `k(x, y) = exp(-gamma * Ham(x, y))`. The Gram matrix is centered with the
//! survey weights,
//!
//! ```text
//! Kc_ij = K_ij - sum_l w_l K_il - sum_l w_l K_lj + sum_lm w_l w_m K_lm
//! ```
//!
//! and eigendecomposed. Components are kept in decreasing eigenvalue order
//! until they cover `variance_fraction` of the positive spectrum. The anomaly
//! score of a row is the squared distance between its centered feature vector
//! and that vector's projection on the kept components. For training rows
//! this is the mass on the discarded positive components; unseen rows also
//! carry mass outside the span of the training data.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::dataset::{CategoricalDataset, NormalizedWeights};
use crate::linalg;
use crate::math;
use crate::parallel;
use crate::stats::compensated_sum;
use crate::{Error, Result};

/// Eigenvalues below this are a kernel bug, not rounding noise.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub gamma: f64,
    pub variance_fraction: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            variance_fraction: 0.95,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.variance_fraction > 0.0 && self.variance_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "variance fraction must lie in (0, 1], got {}",
                self.variance_fraction
            )));
        }
        Ok(())
    }
}

pub fn hamming(x: &[u32], y: &[u32]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(hamming_unchecked(x, y))
}

#[inline]
pub(crate) fn hamming_unchecked(x: &[u32], y: &[u32]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// `exp(-gamma * Ham(x, y))`. Rows must have equal length.
pub fn kernel(x: &[u32], y: &[u32], gamma: f64) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    math::exp(-gamma * hamming_unchecked(x, y) as f64)
}

/// Row-major `n x n` Gram matrix of `d`.
pub fn gram(d: &CategoricalDataset, gamma: f64) -> Vec<f64> {
    let n = d.n_rows();
    // exp(-gamma * h) for every possible distance, so entries are bit-exact
    // across call sites
    let table: Vec<f64> = (0..=d.n_vars())
        .map(|h| math::exp(-gamma * h as f64))
        .collect();
    let rows = parallel::map_indexed(n, |i| {
        let xi = d.row(i);
        (0..n)
            .map(|j| table[hamming_unchecked(xi, d.row(j))])
            .collect::<Vec<f64>>()
    });
    rows.concat()
}

/// A weight-centered Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredGram {
    n: usize,
    matrix: Vec<f64>,
    /// `sum_l w_l K_il` for each `i`.
    row_means: Vec<f64>,
    grand_mean: f64,
    weights: NormalizedWeights,
}

impl CenteredGram {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn weights(&self) -> &NormalizedWeights {
        &self.weights
    }
}

/// Centers a symmetric row-major Gram matrix with normalized weights.
pub fn center_gram(k: &[f64], w: &NormalizedWeights) -> Result<CenteredGram> {
    let n = w.len();
    if k.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix has {} entries, weights imply {n} x {n}",
            k.len()
        )));
    }
    let ws = w.as_slice();
    let row_means: Vec<f64> = (0..n)
        .map(|i| compensated_sum((0..n).map(|l| ws[l] * k[i * n + l])))
        .collect();
    let grand_mean = compensated_sum((0..n).map(|l| ws[l] * row_means[l]));
    let mut matrix = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            matrix.push(k[i * n + j] - row_means[i] - row_means[j] + grand_mean);
        }
    }
    Ok(CenteredGram {
        n,
        matrix,
        row_means,
        grand_mean,
        weights: w.clone(),
    })
}

/// Everything a fitted model carries, for persistence.
#[derive(Debug, Clone, PartialEq)]
pub struct KpcaParts {
    pub config: KernelConfig,
    /// All eigenvalues of the centered Gram, descending, negatives clamped.
    pub eigenvalues: Vec<f64>,
    /// Coefficients of the positive components, column-major `n x positive`.
    pub alphas: Vec<f64>,
    pub positive: usize,
    pub retained: usize,
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
    pub weights: Vec<f64>,
    pub training_errors: Vec<f64>,
}

/// A fitted kernel PCA model. Owns a copy of its training rows, which the
/// out-of-sample kernel column needs.
#[derive(Debug, Clone, PartialEq)]
pub struct KpcaModel {
    parts: KpcaParts,
    training: CategoricalDataset,
    table: Vec<f64>,
    /// Coefficients of the kept components as an `n x retained` matrix.
    kept: DMatrix<f64>,
}

/// Rows scored per matrix product in [`KpcaModel::score`].
const SCORE_CHUNK: usize = 256;

pub fn fit(d: &CategoricalDataset, w: &NormalizedWeights, cfg: &KernelConfig) -> Result<KpcaModel> {
    cfg.validate()?;
    let n = d.n_rows();
    if n < 2 {
        return Err(Error::TooFewItems { needed: 2, got: n });
    }
    if w.len() != n {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: n,
        });
    }
    let k = gram(d, cfg.gamma);
    let centered = center_gram(&k, w)?;
    drop(k);
    let eig = linalg::symmetric_eigen(&centered.matrix, n);

    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let eigenvalues: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let largest = eigenvalues[0];
    let rank_floor = 1e-10 * largest.max(1.0);
    let positive = eigenvalues.iter().take_while(|&&l| l > rank_floor).count();
    if positive == 0 {
        return Err(Error::DegenerateData(
            "centered kernel has no positive eigenvalue (all rows identical?)".into(),
        ));
    }

    let total = compensated_sum(eigenvalues[..positive].iter().copied());
    let retained = if cfg.variance_fraction >= 1.0 {
        positive
    } else {
        let target = cfg.variance_fraction * total;
        let mut acc = 0.0;
        let mut kept = positive;
        for (i, &l) in eigenvalues[..positive].iter().enumerate() {
            acc += l;
            if acc >= target {
                kept = i + 1;
                break;
            }
        }
        kept
    };

    let mut alphas = Vec::with_capacity(n * positive);
    for c in 0..positive {
        let s = math::sqrt(eigenvalues[c]);
        alphas.extend(eig.vector(c).iter().map(|u| u / s));
    }

    // In-sample projections are sqrt(lambda) * u, so the tail norm is
    // sum over discarded components of lambda * u^2.
    let training_errors = (0..n)
        .map(|j| {
            compensated_sum((retained..positive).map(|c| {
                let u = eig.vectors[c * n + j];
                eigenvalues[c] * u * u
            }))
        })
        .collect();

    let parts = KpcaParts {
        config: *cfg,
        eigenvalues,
        alphas,
        positive,
        retained,
        row_means: centered.row_means,
        grand_mean: centered.grand_mean,
        weights: w.as_slice().to_vec(),
        training_errors,
    };
    Ok(KpcaModel::assemble(parts, d.clone()))
}

impl KpcaModel {
    fn assemble(parts: KpcaParts, training: CategoricalDataset) -> Self {
        let table = (0..=training.n_vars())
            .map(|h| math::exp(-parts.config.gamma * h as f64))
            .collect();
        let n = training.n_rows();
        let kept = DMatrix::from_column_slice(n, parts.retained, &parts.alphas[..n * parts.retained]);
        Self {
            parts,
            training,
            table,
            kept,
        }
    }

    /// Rebuilds a model from persisted parts and its training rows.
    pub fn from_parts(parts: KpcaParts, training: CategoricalDataset) -> Result<Self> {
        parts.config.validate()?;
        let n = training.n_rows();
        let ok = parts.eigenvalues.len() == n
            && parts.alphas.len() == n * parts.positive
            && parts.retained <= parts.positive
            && parts.positive <= n
            && parts.row_means.len() == n
            && parts.weights.len() == n
            && parts.training_errors.len() == n;
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "model parts do not fit {n} training rows"
            )));
        }
        Ok(Self::assemble(parts, training))
    }

    pub fn parts(&self) -> &KpcaParts {
        &self.parts
    }

    pub fn config(&self) -> &KernelConfig {
        &self.parts.config
    }

    pub fn training(&self) -> &CategoricalDataset {
        &self.training
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.parts.eigenvalues
    }

    /// Number of kept components.
    pub fn retained(&self) -> usize {
        self.parts.retained
    }

    /// Number of numerically positive eigenvalues.
    pub fn positive(&self) -> usize {
        self.parts.positive
    }

    /// Coefficients of component `c` (valid for `c < positive()`).
    pub fn alpha(&self, c: usize) -> &[f64] {
        let n = self.training.n_rows();
        &self.parts.alphas[c * n..(c + 1) * n]
    }

    /// Reconstruction errors of the training rows.
    pub fn training_errors(&self) -> &[f64] {
        &self.parts.training_errors
    }

    /// Centered kernel column `kc(x_i, z)` over the training rows.
    pub fn centered_kernel_column(&self, z: &[u32]) -> Vec<f64> {
        let n = self.training.n_rows();
        let kz: Vec<f64> = (0..n)
            .map(|i| self.table[hamming_unchecked(self.training.row(i), z)])
            .collect();
        let w = &self.parts.weights;
        let z_mean = compensated_sum((0..n).map(|i| w[i] * kz[i]));
        (0..n)
            .map(|i| kz[i] - z_mean - self.parts.row_means[i] + self.parts.grand_mean)
            .collect()
    }

    /// Coordinates of `z` along every positive component.
    pub fn project(&self, z: &[u32]) -> Result<Vec<f64>> {
        self.check_row(z)?;
        let col = self.centered_kernel_column(z);
        Ok((0..self.parts.positive)
            .map(|c| dot(self.alpha(c), &col))
            .collect())
    }

    /// `|phi(z)|^2` after centering: `k(z,z) - 2 sum_i w_i k(x_i,z) + sum_lm w_l w_m K_lm`.
    pub fn centered_norm(&self, z: &[u32]) -> f64 {
        let w = &self.parts.weights;
        let z_mean = compensated_sum(
            (0..w.len()).map(|i| w[i] * self.table[hamming_unchecked(self.training.row(i), z)]),
        );
        1.0 - 2.0 * z_mean + self.parts.grand_mean
    }

    /// Out-of-sample reconstruction error of one row: the centered feature
    /// norm minus the energy captured by the kept components.
    pub fn reconstruction_error(&self, z: &[u32]) -> Result<f64> {
        self.check_row(z)?;
        let col = self.centered_kernel_column(z);
        let kept = compensated_sum((0..self.parts.retained).map(|c| {
            let t = dot(self.alpha(c), &col);
            t * t
        }));
        Ok((self.centered_norm(z) - kept).max(0.0))
    }

    /// Energy of `z` on the discarded positive components only.
    pub fn tail_energy(&self, z: &[u32]) -> Result<f64> {
        self.check_row(z)?;
        let col = self.centered_kernel_column(z);
        Ok(compensated_sum((self.parts.retained..self.parts.positive).map(|c| {
            let t = dot(self.alpha(c), &col);
            t * t
        })))
    }

    /// Out-of-sample reconstruction errors of every row of `d`.
    pub fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>> {
        if d.n_vars() != self.training.n_vars() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} variables, dataset has {}",
                self.training.n_vars(),
                d.n_vars()
            )));
        }
        let m = d.n_rows();
        let chunks = parallel::map_indexed(m.div_ceil(SCORE_CHUNK), |c| {
            let rows: Vec<usize> = (c * SCORE_CHUNK..((c + 1) * SCORE_CHUNK).min(m)).collect();
            self.score_rows(d, &rows)
        });
        Ok(chunks.concat())
    }

    fn score_rows(&self, d: &CategoricalDataset, rows: &[usize]) -> Vec<f64> {
        let n = self.training.n_rows();
        let mut cols = DMatrix::<f64>::zeros(rows.len(), n);
        for (r, &i) in rows.iter().enumerate() {
            for (c, v) in self.centered_kernel_column(d.row(i)).into_iter().enumerate() {
                cols[(r, c)] = v;
            }
        }
        let proj = cols * &self.kept;
        rows.iter()
            .enumerate()
            .map(|(r, &i)| {
                let kept = compensated_sum(proj.row(r).iter().map(|t| t * t));
                (self.centered_norm(d.row(i)) - kept).max(0.0)
            })
            .collect()
    }

    fn check_row(&self, z: &[u32]) -> Result<()> {
        if z.len() != self.training.n_vars() {
            return Err(Error::LengthMismatch {
                left: z.len(),
                right: self.training.n_vars(),
            });
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
