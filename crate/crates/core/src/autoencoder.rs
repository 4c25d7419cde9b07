//! Shallow autoencoder scored by rounded reconstruction error.
//!
//! For `p` inputs the layers are
//!
//! ```text
//! p -> ceil(p/2) tanh -> ceil(p/4) tanh -> ceil(p/2) identity -> p softplus
//! ```
//!
//! Training minimizes the weighted squared reconstruction error
//! `sum_j w_j |x_j - g(f(x_j))|^2` by gradient descent with momentum.
//! Inputs are raw category codes cast to reals.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{CategoricalDataset, NormalizedWeights};
use crate::math;
use crate::rng;
use crate::stats::compensated_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
    Softplus,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => math::tanh(z),
            Activation::Identity => z,
            Activation::Softplus => math::softplus(z),
        }
    }

    /// Derivative from the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
            Activation::Softplus => math::sigmoid(z),
        }
    }
}

const ACTIVATIONS: [Activation; 4] = [
    Activation::Tanh,
    Activation::Tanh,
    Activation::Identity,
    Activation::Softplus,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    input: usize,
    widths: [usize; 4],
}

impl Architecture {
    pub fn for_inputs(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidConfig("autoencoder needs at least one input".into()));
        }
        let half = p.div_ceil(2);
        let quarter = p.div_ceil(4);
        Ok(Self {
            input: p,
            widths: [half, quarter, half, p],
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn embedding_dim(&self) -> usize {
        self.widths[1]
    }

    /// Output widths of the four dense layers.
    pub fn widths(&self) -> [usize; 4] {
        self.widths
    }

    pub fn activations(&self) -> [Activation; 4] {
        ACTIVATIONS
    }

    fn fan_in(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input
        } else {
            self.widths[layer - 1]
        }
    }

    /// Offset of layer `l`'s weights in the flat parameter vector. Each layer
    /// stores its `out x in` weights row-major, then its `out` biases.
    fn offset(&self, layer: usize) -> usize {
        (0..layer)
            .map(|l| self.widths[l] * (self.fan_in(l) + 1))
            .sum()
    }

    pub fn parameter_count(&self) -> usize {
        self.offset(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// `None` trains full batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Stop once the full-data loss changes by less than this between epochs.
    pub tolerance: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 1e-2,
            momentum: 0.9,
            batch_size: None,
            seed: 0,
            tolerance: 1e-12,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub reconstruction: Vec<f64>,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    arch: Architecture,
    params: Vec<f64>,
    loss_trace: Vec<f64>,
}

impl AeModel {
    /// Seeded uniform initialization in `+-1/sqrt(fan_in)`.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let mut params = Vec::with_capacity(arch.parameter_count());
        for l in 0..4 {
            let bound = 1.0 / math::sqrt(arch.fan_in(l) as f64);
            for _ in 0..arch.widths[l] * (arch.fan_in(l) + 1) {
                params.push(rng.random_range(-bound..=bound));
            }
        }
        Self {
            arch,
            params,
            loss_trace: Vec::new(),
        }
    }

    pub fn from_parts(arch: Architecture, params: Vec<f64>, loss_trace: Vec<f64>) -> Result<Self> {
        if params.len() != arch.parameter_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameters for an architecture needing {}",
                params.len(),
                arch.parameter_count()
            )));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(Self {
            arch,
            params,
            loss_trace,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Full-data loss before training and after each epoch.
    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    pub fn forward(&self, x: &[f64]) -> Forward {
        let acts = self.activations(x);
        Forward {
            reconstruction: acts.a[3].clone(),
            embedding: acts.a[1].clone(),
        }
    }

    fn activations(&self, x: &[f64]) -> Trace {
        let mut z: [Vec<f64>; 4] = Default::default();
        let mut a: [Vec<f64>; 4] = Default::default();
        for l in 0..4 {
            let input: &[f64] = if l == 0 { x } else { &a[l - 1] };
            let fan_in = self.arch.fan_in(l);
            let out = self.arch.widths[l];
            let off = self.arch.offset(l);
            let (w, b) = self.params[off..off + out * (fan_in + 1)].split_at(out * fan_in);
            let zl: Vec<f64> = (0..out)
                .map(|o| {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    b[o] + row.iter().zip(input).map(|(u, v)| u * v).sum::<f64>()
                })
                .collect();
            a[l] = zl.iter().map(|&v| ACTIVATIONS[l].apply(v)).collect();
            z[l] = zl;
        }
        Trace { z, a }
    }

    /// `sum_j w_j |x_j - g(f(x_j))|^2` over a row-major `n x p` matrix.
    pub fn weighted_loss(&self, x: &[f64], w: &NormalizedWeights) -> Result<f64> {
        self.check_matrix(x, w.len())?;
        let p = self.arch.input;
        let loss = compensated_sum(w.as_slice().iter().enumerate().map(|(j, &wj)| {
            let row = &x[j * p..(j + 1) * p];
            let r = self.activations(row);
            wj * squared_distance(row, &r.a[3])
        }));
        if loss.is_finite() {
            Ok(loss)
        } else {
            Err(Error::NonFiniteLoss)
        }
    }

    /// Weighted loss and its gradient with respect to the flat parameters.
    pub fn loss_and_gradient(&self, x: &[f64], w: &NormalizedWeights) -> Result<(f64, Vec<f64>)> {
        self.check_matrix(x, w.len())?;
        let rows: Vec<usize> = (0..w.len()).collect();
        Ok(self.batch_gradient(x, w.as_slice(), &rows, 1.0))
    }

    /// Loss and gradient of `scale * sum_{j in rows} w_j |r_j|^2`.
    fn batch_gradient(&self, x: &[f64], w: &[f64], rows: &[usize], scale: f64) -> (f64, Vec<f64>) {
        let p = self.arch.input;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for &j in rows {
            let wj = w[j] * scale;
            if wj == 0.0 {
                continue;
            }
            let row = &x[j * p..(j + 1) * p];
            let t = self.activations(row);
            loss += wj * squared_distance(row, &t.a[3]);
            let mut upstream: Vec<f64> = t.a[3]
                .iter()
                .zip(row)
                .map(|(r, x)| 2.0 * wj * (r - x))
                .collect();
            for l in (0..4).rev() {
                let input: &[f64] = if l == 0 { row } else { &t.a[l - 1] };
                let fan_in = self.arch.fan_in(l);
                let out = self.arch.widths[l];
                let off = self.arch.offset(l);
                let delta: Vec<f64> = (0..out)
                    .map(|o| upstream[o] * ACTIVATIONS[l].derivative(t.z[l][o], t.a[l][o]))
                    .collect();
                for o in 0..out {
                    let g = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                    for (gi, xi) in g.iter_mut().zip(input) {
                        *gi += delta[o] * xi;
                    }
                    grad[off + out * fan_in + o] += delta[o];
                }
                if l > 0 {
                    let wts = &self.params[off..off + out * fan_in];
                    upstream = (0..fan_in)
                        .map(|i| (0..out).map(|o| wts[o * fan_in + i] * delta[o]).sum())
                        .collect();
                }
            }
        }
        (loss, grad)
    }

    /// Per-row `|x_j - round(g(f(x_j)))|^2`.
    pub fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>> {
        if d.n_vars() != self.arch.input {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} variables, dataset has {}",
                self.arch.input,
                d.n_vars()
            )));
        }
        let x = d.to_real_matrix();
        let p = self.arch.input;
        Ok(crate::parallel::map_indexed(d.n_rows(), |j| {
            self.score_row(&x[j * p..(j + 1) * p])
        }))
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        let r = self.activations(x);
        x.iter()
            .zip(&r.a[3])
            .map(|(x, r)| {
                let e = x - math::round(*r);
                e * e
            })
            .sum()
    }

    fn check_matrix(&self, x: &[f64], n: usize) -> Result<()> {
        if x.len() != n * self.arch.input {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {n} rows of {} inputs",
                x.len(),
                self.arch.input
            )));
        }
        Ok(())
    }
}

struct Trace {
    z: [Vec<f64>; 4],
    a: [Vec<f64>; 4],
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Trains on the codes of `d`.
pub fn train(d: &CategoricalDataset, w: &NormalizedWeights, cfg: &TrainingConfig) -> Result<AeModel> {
    train_matrix(&d.to_real_matrix(), d.n_vars(), w, cfg)
}

/// Trains on a row-major real matrix with `p` columns.
pub fn train_matrix(
    x: &[f64],
    p: usize,
    w: &NormalizedWeights,
    cfg: &TrainingConfig,
) -> Result<AeModel> {
    cfg.validate()?;
    let arch = Architecture::for_inputs(p)?;
    let n = w.len();
    let batch = cfg.batch_size.unwrap_or(n);
    if n == 0 || batch > n {
        return Err(Error::InvalidConfig(format!(
            "batch size {batch} exceeds the {n} training rows"
        )));
    }
    let mut model = AeModel::init(arch, cfg.seed);
    model.check_matrix(x, n)?;
    let mut shuffle_rng = rng::seeded(rng::derive_seed(cfg.seed, &[1]));
    let mut velocity = vec![0.0; model.params.len()];
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    trace.push(model.weighted_loss(x, w)?);

    for epoch in 1..=cfg.epochs {
        if batch < n {
            order.shuffle(&mut shuffle_rng);
        }
        for chunk in order.chunks(batch) {
            // mini-batch sums are rescaled so they estimate the full loss
            let scale = n as f64 / chunk.len() as f64;
            let (_, grad) = model.batch_gradient(x, w.as_slice(), chunk, scale);
            for ((v, g), th) in velocity.iter_mut().zip(&grad).zip(model.params.iter_mut()) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *th += *v;
            }
        }
        let loss = match model.weighted_loss(x, w) {
            Ok(l) => l,
            Err(_) => return Err(Error::Diverged { epoch }),
        };
        if model.params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(loss);
        if math::abs(previous - loss) < cfg.tolerance {
            break;
        }
    }
    model.loss_trace = trace;
    Ok(model)
}
