use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use surveykit_core::dataset::{CategoricalDataset, NormalizedWeights, VariableKind, VariableSpec};
use surveykit_core::fixtures;
use surveykit_core::kpca::{self, KernelConfig};
use surveykit_core::rng::seeded;

fn specs(p: usize, levels: usize) -> Vec<VariableSpec> {
    (0..p)
        .map(|j| VariableSpec::new(format!("v{j}"), (0..levels).map(|c| format!("c{c}")), VariableKind::Nominal).unwrap())
        .collect()
}

fn random_dataset(n: usize, p: usize, levels: usize, seed: u64) -> CategoricalDataset {
    let mut rng = seeded(seed);
    let codes = (0..n * p).map(|_| rng.random_range(0..levels as u32)).collect();
    CategoricalDataset::new(specs(p, levels), codes, vec![1.0; n]).unwrap()
}

fn random_weights(n: usize, seed: u64) -> NormalizedWeights {
    let mut rng = seeded(seed ^ 0xABCD);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    NormalizedWeights::from_raw(&raw).unwrap()
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
fn jacobi_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i * n + j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

#[test]
fn eigenvalues_match_jacobi_oracle() {
    for seed in 0..20 {
        let n = 5 + (seed as usize % 12);
        let d = random_dataset(n, 6, 3, seed);
        let w = random_weights(n, seed);
        let k = kpca::gram(&d, 1.0);
        let c = kpca::center_gram(&k, &w).unwrap();
        let oracle = jacobi_eigenvalues(c.matrix(), n);
        let Ok(model) = kpca::fit(&d, &w, &KernelConfig::default()) else { continue };
        for (a, b) in model.eigenvalues().iter().zip(&oracle) {
            assert!((a - b.max(0.0)).abs() < 1e-8, "seed {seed}: {a} vs {b}");
        }
    }
}

/// Explicit feature map of `exp(-gamma Ham)`: a tensor product of per-variable
/// maps `[sqrt(e^-g), sqrt(1 - e^-g) * onehot]`.
fn feature(row: &[u32], levels: usize, gamma: f64) -> Vec<f64> {
    let e = (-gamma).exp();
    let mut out = vec![1.0];
    for &code in row {
        let mut local = vec![0.0; levels + 1];
        local[0] = e.sqrt();
        local[code as usize + 1] = (1.0 - e).sqrt();
        out = out.iter().flat_map(|a| local.iter().map(move |b| a * b)).collect();
    }
    out
}

struct ExplicitKpca {
    mean: Vec<f64>,
    axes: Vec<Vec<f64>>,
    gap: f64,
}

impl ExplicitKpca {
    fn fit(d: &CategoricalDataset, w: &NormalizedWeights, levels: usize, cfg: &KernelConfig) -> Self {
        let feats: Vec<Vec<f64>> = (0..d.n_rows()).map(|i| feature(d.row(i), levels, cfg.gamma)).collect();
        let dim = feats[0].len();
        let mut mean = vec![0.0; dim];
        for (f, wi) in feats.iter().zip(w.as_slice()) {
            for (m, v) in mean.iter_mut().zip(f) {
                *m += wi * v;
            }
        }
        let centered: Vec<f64> = feats.iter().flat_map(|f| f.iter().zip(&mean).map(|(a, b)| a - b)).collect();
        let f = DMatrix::from_row_slice(d.n_rows(), dim, &centered);
        let scatter = f.transpose() * &f;
        let eig = SymmetricEigen::new(scatter);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let floor = 1e-10 * values[0].max(1.0);
        let positive = values.iter().take_while(|&&l| l > floor).count();
        let total: f64 = values[..positive].iter().sum();
        let mut kept = positive;
        if cfg.variance_fraction < 1.0 {
            let mut acc = 0.0;
            for (i, l) in values[..positive].iter().enumerate() {
                acc += l;
                if acc >= cfg.variance_fraction * total {
                    kept = i + 1;
                    break;
                }
            }
        }
        let gap = if kept < positive { values[kept - 1] - values[kept] } else { f64::INFINITY };
        let axes = order[..kept].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
        Self { mean, axes, gap }
    }

    fn error(&self, row: &[u32], levels: usize, gamma: f64) -> f64 {
        let phi: Vec<f64> = feature(row, levels, gamma).iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let norm: f64 = phi.iter().map(|v| v * v).sum();
        let captured: f64 = self.axes.iter().map(|a| a.iter().zip(&phi).map(|(x, y)| x * y).sum::<f64>().powi(2)).sum();
        norm - captured
    }
}

#[test]
fn reconstruction_matches_explicit_feature_map() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let n = 4 + (seed as usize % 9);
        let p = 2 + (seed as usize % 3);
        let levels = 2 + (seed as usize % 2);
        let d = random_dataset(n, p, levels, seed);
        let w = if seed % 2 == 0 { NormalizedWeights::uniform(n) } else { random_weights(n, seed) };
        let cfg = KernelConfig {
            gamma: [1.0, 0.5, 2.0][seed as usize % 3],
            variance_fraction: [0.95, 0.99, 0.8, 1.0][seed as usize % 4],
        };
        let Ok(model) = kpca::fit(&d, &w, &cfg) else { continue };
        let oracle = ExplicitKpca::fit(&d, &w, levels, &cfg);
        if oracle.gap < 1e-7 {
            continue;
        }
        let fresh = random_dataset(5, p, levels, seed + 1000);
        for row in (0..n).map(|i| d.row(i)).chain((0..5).map(|i| fresh.row(i))) {
            let got = model.reconstruction_error(row).unwrap();
            let want = oracle.error(row, levels, cfg.gamma).max(0.0);
            assert!((got - want).abs() <= 1e-8, "seed {seed}: {got} vs {want}");
        }
        for (i, e) in model.training_errors().iter().enumerate() {
            assert!((e - oracle.error(d.row(i), levels, cfg.gamma)).abs() <= 1e-8);
        }
        checked += 1;
    }
    assert!(checked >= 40, "only {checked} instances had a clean spectral gap");
}

fn min_eigenvalue(a: &[f64], n: usize) -> f64 {
    SymmetricEigen::new(DMatrix::from_row_slice(n, n, a)).eigenvalues.min()
}

#[test]
fn kernel_algebra_on_random_instances() {
    let mut rng = seeded(2024);
    for instance in 0..50u64 {
        let n = rng.random_range(2..=40);
        let p = rng.random_range(1..=19);
        let levels = rng.random_range(2..=6);
        let d = random_dataset(n, p, levels, instance);
        let gamma = rng.random_range(0.1..3.0);
        let k = kpca::gram(&d, gamma);
        assert!(min_eigenvalue(&k, n) >= -1e-8);

        let w = random_weights(n, instance);
        let c = kpca::center_gram(&k, &w).unwrap();
        for i in 0..n {
            let s: f64 = (0..n).map(|j| w.as_slice()[j] * c.get(i, j)).sum();
            assert!(s.abs() <= 1e-8);
        }

        let u = kpca::center_gram(&k, &NormalizedWeights::uniform(n)).unwrap();
        let km = DMatrix::from_row_slice(n, n, &k);
        let h = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
        let classical = &h * km * &h;
        for i in 0..n {
            for j in 0..n {
                assert!((u.get(i, j) - classical[(i, j)]).abs() <= 1e-10);
            }
        }

        let cfg = KernelConfig { gamma, variance_fraction: 1.0 };
        if let Ok(model) = kpca::fit(&d, &w, &cfg) {
            for e in model.score(&d).unwrap() {
                assert!(e <= 1e-8);
            }
        }
    }
}

#[test]
fn toy_gram_is_psd() {
    let d = CategoricalDataset::new(specs(3, 3), vec![0, 1, 2, 0, 1, 1, 2, 2, 2, 1, 0, 2], vec![1.0; 4]).unwrap();
    assert!(min_eigenvalue(&kpca::gram(&d, 1.0), 4) >= -1e-10);
}

#[test]
fn scores_follow_row_permutation() {
    let d = random_dataset(25, 8, 3, 5);
    let w = random_weights(25, 5);
    let mut perm: Vec<usize> = (0..25).collect();
    perm.reverse();
    perm.swap(3, 17);
    let pd = d.subset(&perm).unwrap();
    let pw = NormalizedWeights::from_raw(&perm.iter().map(|&i| w.as_slice()[i]).collect::<Vec<_>>()).unwrap();
    let cfg = KernelConfig::default();
    let a = kpca::fit(&d, &w, &cfg).unwrap();
    let b = kpca::fit(&pd, &pw, &cfg).unwrap();
    let fresh = random_dataset(10, 8, 3, 77);
    let (sa, sb) = (a.score(&fresh).unwrap(), b.score(&fresh).unwrap());
    for (x, y) in sa.iter().zip(&sb) {
        assert!((x - y).abs() <= 1e-8);
    }
    for (k, &i) in perm.iter().enumerate() {
        assert!((b.training_errors()[k] - a.training_errors()[i]).abs() <= 1e-8);
    }
}

#[test]
fn rare_rows_reconstruct_worse_than_common_ones() {
    let d = fixtures::eusilc_fixture(400, 3).unwrap();
    let w = NormalizedWeights::uniform(400);
    let model = kpca::fit(&d, &w, &KernelConfig::default()).unwrap();
    // Most frequent row pattern.
    let mut rows: Vec<&[u32]> = (0..400).map(|i| d.row(i)).collect();
    rows.sort();
    let mut best = (0, rows[0]);
    let mut run = 1;
    for i in 1..rows.len() {
        run = if rows[i] == rows[i - 1] { run + 1 } else { 1 };
        if run > best.0 {
            best = (run, rows[i]);
        }
    }
    let common = best.1.to_vec();
    // Least frequent category everywhere.
    let rare: Vec<u32> = (0..d.n_vars())
        .map(|v| {
            let n = d.specs()[v].category_count() as u32;
            (0..n).min_by_key(|&c| d.column(v).filter(|x| *x == c).count()).unwrap()
        })
        .collect();
    assert!(model.reconstruction_error(&common).unwrap() <= model.reconstruction_error(&rare).unwrap());
}

proptest! {
    #[test]
    fn kernel_symmetric_bounded(a in prop::collection::vec(0u32..4, 7), b in prop::collection::vec(0u32..4, 7), g in 0.01f64..5.0) {
        let kab = kpca::kernel(&a, &b, g);
        prop_assert_eq!(kab, kpca::kernel(&b, &a, g));
        prop_assert!(kab > 0.0 && kab <= 1.0);
        prop_assert_eq!(kab == 1.0, a == b);
    }
}
