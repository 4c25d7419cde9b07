use proptest::prelude::*;
use rand::Rng;
use surveykit_core::dataset::{CategoricalDataset, NormalizedWeights};
use surveykit_core::fixtures;
use surveykit_core::kpca::KernelConfig;
use surveykit_core::labeling::{
    internal_validation, mcc, permutation_importance, stability_validation, two_means_1d,
    Detector, Fitted, FittedPipeline, KpcaDetector, RefitMode, ScoreModel,
};
use surveykit_core::rng::seeded;
use surveykit_core::Result;

/// Every threshold between distinct values, SSE by two-pass means.
fn exhaustive_split(scores: &[f64]) -> Vec<bool> {
    let mut distinct = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let sse = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let total = sse(scores);
    let mut best: Option<(f64, Vec<bool>)> = None;
    for t in &distinct[1..] {
        let labels: Vec<bool> = scores.iter().map(|s| s >= t).collect();
        let hi: Vec<f64> = scores.iter().copied().filter(|s| s >= t).collect();
        let lo: Vec<f64> = scores.iter().copied().filter(|s| s < t).collect();
        let v = sse(&hi) + sse(&lo);
        match &best {
            Some((b, _)) if v >= b - 1e-12 * total => {}
            _ => best = Some((v, labels)),
        }
    }
    best.unwrap().1
}

#[test]
fn two_means_matches_exhaustive_oracle() {
    let mut rng = seeded(2024);
    for case in 0..1000 {
        let n = rng.random_range(2..=200usize);
        let scores: Vec<f64> = if case % 4 == 0 {
            // integer scores exercise ties
            (0..n).map(|_| rng.random_range(0..6u32) as f64).collect()
        } else {
            (0..n).map(|_| rng.random::<f64>().powi(3) * 10.0).collect()
        };
        if scores.iter().all(|&s| s == scores[0]) {
            continue;
        }
        let got = two_means_1d(&scores).unwrap();
        assert_eq!(got.labels, exhaustive_split(&scores), "case {case}");
        assert!(got.high_centroid > got.low_centroid);
    }
}

proptest! {
    #[test]
    fn two_means_invariant_to_order_and_affine_maps(
        scores in prop::collection::vec(0.0f64..100.0, 2..60),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
        rot in 0usize..60,
    ) {
        prop_assume!(scores.iter().any(|&s| s != scores[0]));
        let base = two_means_1d(&scores).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|s| s * scale + shift).collect();
        let m = two_means_1d(&mapped);
        // an affine map can merge floats that were distinct; skip those
        if let Ok(m) = m {
            prop_assert_eq!(&m.labels, &base.labels);
        }
        let k = rot % scores.len();
        let mut rotated = scores.clone();
        rotated.rotate_left(k);
        let r = two_means_1d(&rotated).unwrap();
        let mut expected = base.labels.clone();
        expected.rotate_left(k);
        prop_assert_eq!(r.labels, expected);
    }

    #[test]
    fn mcc_symmetric_and_flip_invariant(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..80)
    ) {
        let a: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let ab = mcc(&a, &b).unwrap().value;
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, mcc(&b, &a).unwrap().value);
        let na: Vec<bool> = a.iter().map(|x| !x).collect();
        let nb: Vec<bool> = b.iter().map(|x| !x).collect();
        prop_assert!((ab - mcc(&na, &nb).unwrap().value).abs() < 1e-12);
    }
}

/// Scores each row by the code of one column.
struct ColumnScore(usize);

impl ScoreModel for ColumnScore {
    fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>> {
        Ok(d.column(self.0).map(f64::from).collect())
    }
}

impl Detector for ColumnScore {
    type Model = ColumnScore;
    fn fit(&self, d: &CategoricalDataset, _: &NormalizedWeights) -> Result<Fitted<ColumnScore>> {
        Ok(Fitted {
            model: ColumnScore(self.0),
            scores: self.score(d)?,
        })
    }
}

/// Fresh uniform noise on every fit.
struct Noise(std::sync::atomic::AtomicU64);

impl ScoreModel for Noise {
    fn score(&self, d: &CategoricalDataset) -> Result<Vec<f64>> {
        let s = self.0.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let mut rng = seeded(s);
        Ok((0..d.n_rows()).map(|_| rng.random()).collect())
    }
}

impl Detector for Noise {
    type Model = Noise;
    fn fit(&self, d: &CategoricalDataset, _: &NormalizedWeights) -> Result<Fitted<Noise>> {
        let model = Noise(std::sync::atomic::AtomicU64::new(
            self.0.fetch_add(1_000_003, std::sync::atomic::Ordering::Relaxed),
        ));
        let scores = model.score(d)?;
        Ok(Fitted { model, scores })
    }
}

#[test]
fn identity_scores_on_bimodal_data_are_stable() {
    let (d, _) = fixtures::separable_fixture(30, 10, 3, 1).unwrap();
    // column 0 of the separable fixture is 0 or >= 4; collapse to two values
    let codes: Vec<u32> = d.codes().iter().map(|&c| if c >= 4 { 7 } else { 0 }).collect();
    let d = CategoricalDataset::new(d.specs().to_vec(), codes, d.weights().to_vec()).unwrap();
    let w = NormalizedWeights::uniform(d.n_rows());
    let r = stability_validation(&ColumnScore(0), &d, &w, RefitMode::Full).unwrap();
    assert_eq!(r.mcc_mean, 1.0);
    let r = internal_validation(&ColumnScore(0), &d, &w, 10, 3).unwrap();
    assert_eq!(r.mcc_mean, 1.0);
}

#[test]
fn random_scores_are_unstable() {
    let d = fixtures::eusilc_fixture(80, 0).unwrap();
    let w = NormalizedWeights::uniform(80);
    let noise = Noise(std::sync::atomic::AtomicU64::new(1));
    let r = stability_validation(&noise, &d, &w, RefitMode::Full).unwrap();
    assert!(r.mcc_mean < 0.5, "{}", r.mcc_mean);
    assert!(r.mcc_ci_low <= r.mcc_mean && r.mcc_mean <= r.mcc_ci_high);
}

#[test]
fn kpca_separates_the_engineered_fixture() {
    let (d, truth) = fixtures::separable_fixture(390, 10, 8, 7).unwrap();
    let w = NormalizedWeights::uniform(d.n_rows());
    let det = KpcaDetector::default();
    let fitted = det.fit(&d, &w).unwrap();
    assert_eq!(two_means_1d(&fitted.scores).unwrap().labels, truth);
    let loo = stability_validation(&det, &d, &w, RefitMode::Full).unwrap();
    assert_eq!(loo.mcc_mean, 1.0);
    let kf = internal_validation(&det, &d, &w, 10, 11).unwrap();
    assert_eq!(kf.mcc_mean, 1.0, "{:?}", kf.per_iteration);
}

#[test]
fn internal_validation_is_deterministic() {
    let d = fixtures::eusilc_fixture(120, 5).unwrap();
    let w = NormalizedWeights::uniform(120);
    let det = KpcaDetector {
        config: KernelConfig::default(),
    };
    let a = internal_validation(&det, &d, &w, 10, 9).unwrap();
    let b = internal_validation(&det, &d, &w, 10, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn importance_ignores_unread_and_constant_columns() {
    let mut rng = seeded(4);
    let n = 40;
    let specs = fixtures::categorical_blobs(1, 1, 3, 40, 0.0, 0).unwrap().data.specs().to_vec();
    let mut codes = Vec::new();
    for i in 0..n {
        codes.push(if i < 30 { 0 } else { 5 + rng.random_range(0..3u32) });
        codes.push(i as u32); // all distinct
        codes.push(7); // constant
    }
    let d = CategoricalDataset::new(specs, codes, vec![1.0; n]).unwrap();
    let w = NormalizedWeights::uniform(n);
    let pipe = FittedPipeline::fit(&ColumnScore(0), &d, &w).unwrap();
    let rep = permutation_importance(&pipe, &d, 30, 1).unwrap();
    assert!(rep.variables[0].mean > 0.1);
    assert_eq!(rep.variables[1].mean, 0.0);
    assert_eq!(rep.variables[2].mean, 0.0);
    for v in &rep.variables {
        assert!(v.replicates.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(v.ci_low <= v.mean && v.mean <= v.ci_high);
    }
    assert!(permutation_importance(&pipe, &d, 1, 1).is_err());
    let two = permutation_importance(&pipe, &d, 2, 1).unwrap();
    assert_eq!(two.variables[0].replicates.len(), 2);
}
