use rand::Rng;
use surveykit_core::autoencoder::{train, train_matrix, AeModel, Architecture, TrainingConfig};
use surveykit_core::dataset::{CategoricalDataset, NormalizedWeights};
use surveykit_core::fixtures;
use surveykit_core::rng::seeded;

fn max_relative_gradient_error(model: &AeModel, x: &[f64], w: &NormalizedWeights) -> f64 {
    let (_, grad) = model.loss_and_gradient(x, w).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..grad.len() {
        let mut plus = model.clone();
        plus.params_mut()[i] += h;
        let mut minus = model.clone();
        minus.params_mut()[i] -= h;
        let fd = (plus.weighted_loss(x, w).unwrap() - minus.weighted_loss(x, w).unwrap()) / (2.0 * h);
        let scale = grad[i].abs().max(fd.abs()).max(1e-6);
        worst = worst.max((grad[i] - fd).abs() / scale);
    }
    worst
}

fn random_instance(seed: u64, uniform: bool) -> (AeModel, Vec<f64>, NormalizedWeights) {
    let mut rng = seeded(seed);
    let p = rng.random_range(2..=10usize);
    let n = rng.random_range(3..=10usize);
    let x: Vec<f64> = (0..n * p).map(|_| rng.random_range(0..5u32) as f64).collect();
    let w = if uniform {
        NormalizedWeights::uniform(n)
    } else {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        NormalizedWeights::from_raw(&raw).unwrap()
    };
    let model = AeModel::init(Architecture::for_inputs(p).unwrap(), seed ^ 0xa5a5);
    (model, x, w)
}

#[test]
fn gradient_matches_finite_differences_on_toy_set() {
    let mut rng = seeded(3);
    let x: Vec<f64> = (0..8 * 6).map(|_| rng.random_range(0..4u32) as f64).collect();
    let model = AeModel::init(Architecture::for_inputs(6).unwrap(), 9);
    let w = NormalizedWeights::uniform(8);
    assert!(max_relative_gradient_error(&model, &x, &w) <= 1e-4);
}

#[test]
fn gradient_matches_finite_differences_on_random_instances() {
    for seed in 0..20 {
        for uniform in [true, false] {
            let (model, x, w) = random_instance(seed, uniform);
            let err = max_relative_gradient_error(&model, &x, &w);
            assert!(err <= 1e-4, "seed {seed} uniform {uniform}: {err}");
        }
    }
}

#[test]
fn gradient_check_holds_after_some_training() {
    let (_, x, w) = random_instance(77, false);
    let p = x.len() / w.len();
    let cfg = TrainingConfig {
        epochs: 50,
        seed: 1,
        ..TrainingConfig::default()
    };
    let model = train_matrix(&x, p, &w, &cfg).unwrap();
    assert!(max_relative_gradient_error(&model, &x, &w) <= 1e-4);
}

#[test]
fn uniform_weights_give_the_mean_loss() {
    let (model, x, w) = random_instance(5, true);
    let n = w.len();
    let p = x.len() / n;
    let mean: f64 = (0..n)
        .map(|j| {
            let row = &x[j * p..(j + 1) * p];
            let r = model.forward(row).reconstruction;
            row.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .sum::<f64>()
        / n as f64;
    assert!((model.weighted_loss(&x, &w).unwrap() - mean).abs() < 1e-12);
}

#[test]
fn full_batch_descent_never_increases_the_loss() {
    for seed in 0..5 {
        let (_, x, w) = random_instance(seed + 100, seed % 2 == 0);
        let p = x.len() / w.len();
        let cfg = TrainingConfig {
            epochs: 300,
            learning_rate: 1e-3,
            momentum: 0.0,
            seed,
            tolerance: 0.0,
            ..TrainingConfig::default()
        };
        let model = train_matrix(&x, p, &w, &cfg).unwrap();
        for pair in model.loss_trace().windows(2) {
            assert!(pair[1] <= pair[0] + 1e-6, "seed {seed}: {} -> {}", pair[0], pair[1]);
        }
    }
}

#[test]
fn constant_data_is_learned() {
    let x: Vec<f64> = [2.0, 0.0, 1.0, 3.0, 1.0, 0.0].repeat(20);
    let w = NormalizedWeights::uniform(20);
    let model = train_matrix(&x, 6, &w, &TrainingConfig::default()).unwrap();
    let trace = model.loss_trace();
    assert!(trace.last().unwrap() < &(0.1 * trace[0]), "{:?}", (trace[0], trace.last()));
    assert!(trace.last().unwrap() <= &trace[0]);
}

#[test]
fn duplicate_rows_score_equally() {
    let d = fixtures::eusilc_fixture(60, 4).unwrap();
    let w = NormalizedWeights::uniform(60);
    let cfg = TrainingConfig {
        epochs: 50,
        ..TrainingConfig::default()
    };
    let model = train(&d, &w, &cfg).unwrap();
    let doubled = d.subset(&[0, 1, 0]).unwrap();
    let s = model.score(&doubled).unwrap();
    assert_eq!(s[0], s[2]);
    assert!(s.iter().all(|&v| v >= 0.0));
}

fn with_rare_row(d: &CategoricalDataset) -> CategoricalDataset {
    // last row takes the least frequent observed category of every variable
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    let vars: Vec<usize> = (0..d.n_vars()).collect();
    let mut codes = d.subset(&rows).unwrap().codes().to_vec();
    let p = d.n_vars();
    let n = d.n_rows();
    for &v in &vars {
        let k = d.specs()[v].category_count();
        let mut counts = vec![0usize; k];
        for c in d.column(v) {
            counts[c as usize] += 1;
        }
        let rare = (0..k).filter(|&c| counts[c] > 0).min_by_key(|&c| counts[c]).unwrap();
        codes[(n - 1) * p + v] = rare as u32;
    }
    CategoricalDataset::new(d.specs().to_vec(), codes, d.weights().to_vec()).unwrap()
}

#[test]
fn rare_pattern_scores_above_median() {
    let mut passes = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let d = with_rare_row(&fixtures::eusilc_fixture(300, seed).unwrap());
        let w = NormalizedWeights::uniform(d.n_rows());
        let cfg = TrainingConfig {
            seed,
            ..TrainingConfig::default()
        };
        let model = train(&d, &w, &cfg).unwrap();
        let scores = model.score(&d).unwrap();
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        if *scores.last().unwrap() > median {
            passes += 1;
        }
    }
    assert!(passes * 10 >= seeds * 9, "{passes}/{seeds}");
}
