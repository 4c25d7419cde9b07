//! Dense symmetric eigendecomposition and a small linear solver.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::math;

/// Eigenpairs sorted by descending eigenvalue.
pub(crate) struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    /// Column-major: eigenvector `j` is `vectors[j * n..(j + 1) * n]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

/// Decomposes a symmetric row-major `n x n` matrix.
///
/// Eigenvectors are sign-normalized so their first non-negligible coefficient
/// is positive; equal eigenvalues are ordered lexicographically by vector.
pub(crate) fn symmetric_eigen(matrix: &[f64], n: usize) -> SymmetricEigen {
    debug_assert_eq!(matrix.len(), n * n);
    // Row-major and column-major coincide for a symmetric matrix.
    let m = DMatrix::from_column_slice(n, n, matrix);
    let eig = m.symmetric_eigen();

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            if let Some(first) = v.iter().copied().find(|c| math::abs(*c) > 1e-12) {
                if first < 0.0 {
                    v.iter_mut().for_each(|c| *c = -*c);
                }
            }
            (eig.eigenvalues[j], v)
        })
        .collect();

    pairs.sort_by(|a, b| match b.0.total_cmp(&a.0) {
        Ordering::Equal => lexicographic(&b.1, &a.1),
        other => other,
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for (value, vector) in pairs {
        values.push(value);
        vectors.extend_from_slice(&vector);
    }
    SymmetricEigen { n, values, vectors }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Solves `A x = b` for a small dense row-major system; `None` if singular.
pub(crate) fn solve(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_row_slice(n, n, a);
    let rhs = DVector::from_column_slice(b);
    m.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}
