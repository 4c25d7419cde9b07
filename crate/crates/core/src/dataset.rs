//! Category-coded survey microdata with per-row design weights.
//!
//! Codes are 0-based indices into each variable's declared category list, in
//! declaration order. Files always carry labels; codes never leave the process.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariableKind {
    Nominal,
    Ordinal,
    Binary,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Nominal => "nominal",
            VariableKind::Ordinal => "ordinal",
            VariableKind::Binary => "binary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nominal" => Some(VariableKind::Nominal),
            "ordinal" => Some(VariableKind::Ordinal),
            "binary" => Some(VariableKind::Binary),
            _ => None,
        }
    }
}

/// One categorical variable: a name, its ordered category labels and kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    name: String,
    categories: Vec<String>,
    kind: VariableKind,
}

impl VariableSpec {
    /// Labels must be unique and at least two must be declared.
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
        kind: VariableKind,
    ) -> Result<Self> {
        let name = name.into();
        let categories: Vec<String> = categories.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidSpec("variable name is empty".into()));
        }
        if categories.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "variable {name:?} declares {} categories; at least 2 are required",
                categories.len()
            )));
        }
        for (i, c) in categories.iter().enumerate() {
            if categories[..i].contains(c) {
                return Err(Error::InvalidSpec(format!(
                    "variable {name:?} declares category {c:?} twice"
                )));
            }
        }
        if kind == VariableKind::Binary && categories.len() != 2 {
            return Err(Error::InvalidSpec(format!(
                "binary variable {name:?} must declare exactly 2 categories"
            )));
        }
        Ok(Self {
            name,
            categories,
            kind,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn kind(&self) -> VariableKind {
        self.kind
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    pub fn code_of(&self, label: &str) -> Option<u32> {
        self.categories
            .iter()
            .position(|c| c == label)
            .map(|i| i as u32)
    }

    pub fn label(&self, code: u32) -> &str {
        &self.categories[code as usize]
    }
}

/// An `n x p` matrix of category codes plus `n` nonnegative design weights.
///
/// Immutable after construction; every cell is a valid code and at least one
/// weight is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    specs: Vec<VariableSpec>,
    codes: Vec<u32>,
    weights: Vec<f64>,
}

impl CategoricalDataset {
    /// Builds a dataset from row-major codes. `weights.len()` fixes `n`.
    pub fn new(specs: Vec<VariableSpec>, codes: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        let p = specs.len();
        if p == 0 {
            return Err(Error::SchemaMismatch("no variables declared".into()));
        }
        let n = weights.len();
        if n == 0 {
            return Err(Error::SchemaMismatch("dataset has no rows".into()));
        }
        if codes.len() != n * p {
            return Err(Error::SchemaMismatch(format!(
                "{} codes for {n} rows of {p} variables",
                codes.len()
            )));
        }
        for (idx, &code) in codes.iter().enumerate() {
            let spec = &specs[idx % p];
            if code as usize >= spec.category_count() {
                return Err(Error::UnknownCategory {
                    variable: spec.name().to_string(),
                    value: format!("#{code}"),
                    row: idx / p,
                });
            }
        }
        check_weights(&weights)?;
        Ok(Self {
            specs,
            codes,
            weights,
        })
    }

    /// Encodes label rows against the specs. Empty cells are missing.
    pub fn from_labels<R, S>(specs: Vec<VariableSpec>, rows: R, weights: Vec<f64>) -> Result<Self>
    where
        R: IntoIterator,
        R::Item: AsRef<[S]>,
        S: AsRef<str>,
    {
        let p = specs.len();
        let mut codes = Vec::with_capacity(weights.len() * p);
        let mut count = 0;
        for (row, labels) in rows.into_iter().enumerate() {
            let labels = labels.as_ref();
            if labels.len() != p {
                return Err(Error::SchemaMismatch(format!(
                    "row {row} has {} cells, expected {p}",
                    labels.len()
                )));
            }
            for (spec, label) in specs.iter().zip(labels) {
                let label = label.as_ref();
                if label.is_empty() {
                    return Err(Error::MissingCell {
                        row,
                        variable: spec.name().to_string(),
                    });
                }
                let code = spec.code_of(label).ok_or_else(|| Error::UnknownCategory {
                    variable: spec.name().to_string(),
                    value: label.to_string(),
                    row,
                })?;
                codes.push(code);
            }
            count += 1;
        }
        if count != weights.len() {
            return Err(Error::LengthMismatch {
                left: count,
                right: weights.len(),
            });
        }
        Self::new(specs, codes, weights)
    }

    pub fn n_rows(&self) -> usize {
        self.weights.len()
    }

    pub fn n_vars(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[VariableSpec] {
        &self.specs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row-major code matrix.
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let p = self.n_vars();
        &self.codes[i * p..(i + 1) * p]
    }

    pub fn code(&self, row: usize, variable: usize) -> u32 {
        self.codes[row * self.n_vars() + variable]
    }

    pub fn label(&self, row: usize, variable: usize) -> &str {
        self.specs[variable].label(self.code(row, variable))
    }

    pub fn column(&self, variable: usize) -> impl Iterator<Item = u32> + '_ {
        self.codes
            .iter()
            .skip(variable)
            .step_by(self.n_vars())
            .copied()
    }

    /// Rows at `indices`, in that order, with their weights.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let p = self.n_vars();
        let mut codes = Vec::with_capacity(indices.len() * p);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            codes.extend_from_slice(self.row(i));
            weights.push(self.weights[i]);
        }
        Self::new(self.specs.clone(), codes, weights)
    }

    /// Copy with one column replaced by `values` (weights untouched).
    pub fn with_column(&self, variable: usize, values: &[u32]) -> Result<Self> {
        if variable >= self.n_vars() {
            return Err(Error::BadVariableIndex {
                index: variable,
                count: self.n_vars(),
            });
        }
        if values.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.n_rows(),
            });
        }
        let mut codes = self.codes.clone();
        let p = self.n_vars();
        for (i, &v) in values.iter().enumerate() {
            codes[i * p + variable] = v;
        }
        Self::new(self.specs.clone(), codes, self.weights.clone())
    }

    /// Copy with new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: self.n_rows(),
            });
        }
        Self::new(self.specs.clone(), self.codes.clone(), weights)
    }

    /// Codes cast to reals, row-major; the autoencoder input.
    pub fn to_real_matrix(&self) -> Vec<f64> {
        self.codes.iter().map(|&c| c as f64).collect()
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    for (row, &w) in weights.iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::NegativeWeight { row });
        }
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::AllZeroWeights);
    }
    Ok(())
}

/// Weights rescaled to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedWeights(Vec<f64>);

impl NormalizedWeights {
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        for (row, &w) in raw.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { row });
            }
        }
        let total = crate::stats::compensated_sum(raw.iter().copied());
        if !(total > 0.0) {
            return Err(Error::AllZeroWeights);
        }
        Ok(Self(raw.iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// The weights of `indices`, renormalized.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let raw: Vec<f64> = indices.iter().map(|&i| self.0[i]).collect();
        Self::from_raw(&raw)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn normalize_weights(d: &CategoricalDataset) -> Result<NormalizedWeights> {
    NormalizedWeights::from_raw(d.weights())
}

/// Category frequencies for one variable, used to draw synthetic rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    spec: VariableSpec,
    probabilities: Vec<f64>,
}

impl Marginal {
    /// Published frequencies are rounded, so sums within `1 +/- 0.01` are
    /// accepted and renormalized.
    pub fn new(spec: VariableSpec, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != spec.category_count() {
            return Err(Error::InvalidMarginal(format!(
                "{}: {} frequencies for {} categories",
                spec.name(),
                probabilities.len(),
                spec.category_count()
            )));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidMarginal(format!(
                "{}: frequencies must be finite and nonnegative",
                spec.name()
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 0.01 + 1e-12 {
            return Err(Error::InvalidMarginal(format!(
                "{}: frequencies sum to {total}",
                spec.name()
            )));
        }
        let probabilities = probabilities.iter().map(|p| p / total).collect();
        Ok(Self {
            spec,
            probabilities,
        })
    }

    pub fn spec(&self) -> &VariableSpec {
        &self.spec
    }

    /// Renormalized frequencies.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_positive = i;
                if u < acc {
                    return i as u32;
                }
            }
        }
        last_positive as u32
    }
}

/// Draws `n` rows with every variable independent, following `marginals`.
/// Unit weights; deterministic for a given seed.
pub fn generate_fixture(marginals: &[Marginal], n: usize, seed: u64) -> Result<CategoricalDataset> {
    if n == 0 {
        return Err(Error::InvalidConfig("fixture size must be at least 1".into()));
    }
    if marginals.is_empty() {
        return Err(Error::InvalidMarginal("no marginals given".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut codes = Vec::with_capacity(n * marginals.len());
    for _ in 0..n {
        for m in marginals {
            codes.push(m.draw(&mut rng));
        }
    }
    let specs = marginals.iter().map(|m| m.spec.clone()).collect();
    CategoricalDataset::new(specs, codes, vec![1.0; n])
}
