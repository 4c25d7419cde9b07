use proptest::prelude::*;
use surveykit_core::dataset::{generate_fixture, NormalizedWeights, normalize_weights, CategoricalDataset, Marginal, VariableKind, VariableSpec};
use surveykit_core::fixtures::{eusilc_fixture, eusilc_marginals, EUSILC_ROWS};

fn weighted(weights: Vec<f64>) -> CategoricalDataset {
    let spec = VariableSpec::new("A", ["x", "y"], VariableKind::Binary).unwrap();
    let n = weights.len();
    CategoricalDataset::new(vec![spec], vec![0; n], weights).unwrap()
}

#[test]
fn normalize_examples() {
    assert_eq!(normalize_weights(&weighted(vec![2.0, 2.0, 4.0])).unwrap().as_slice(), &[0.25, 0.25, 0.5]);
    for w in normalize_weights(&weighted(vec![1.0; 3])).unwrap().as_slice() {
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!(CategoricalDataset::new(weighted(vec![1.0; 3]).specs().to_vec(), vec![0; 3], vec![0.0; 3]).is_err());
    assert!(NormalizedWeights::from_raw(&[0.0; 3]).is_err());
}

#[test]
fn italian_citizenship_marginal() {
    let spec = VariableSpec::new("CITTADX", ["Yes", "No"], VariableKind::Binary).unwrap();
    let m = Marginal::new(spec, vec![0.954, 0.047]).unwrap();
    let d = generate_fixture(&[m], 10_000, 4).unwrap();
    let yes = d.column(0).filter(|&c| c == 0).count() as f64 / 10_000.0;
    assert!((yes - 0.954).abs() <= 0.01);
}

#[test]
fn degenerate_marginal_and_determinism() {
    let spec = VariableSpec::new("A", ["A", "B"], VariableKind::Binary).unwrap();
    let m = Marginal::new(spec, vec![1.0, 0.0]).unwrap();
    let d = generate_fixture(&[m], 5, 0).unwrap();
    assert!(d.column(0).all(|c| c == 0));
    assert_eq!(eusilc_fixture(EUSILC_ROWS, 9).unwrap(), eusilc_fixture(EUSILC_ROWS, 9).unwrap());
    assert_ne!(eusilc_fixture(200, 9).unwrap(), eusilc_fixture(200, 10).unwrap());
}

#[test]
fn marginals_outside_rounding_band_are_rejected() {
    let spec = VariableSpec::new("A", ["A", "B"], VariableKind::Binary).unwrap();
    assert!(Marginal::new(spec.clone(), vec![0.5, 0.52]).is_err());
    assert!(Marginal::new(spec.clone(), vec![-0.1, 1.1]).is_err());
    assert!(Marginal::new(spec, vec![1.0]).is_err());
}

#[test]
fn empirical_marginals_within_binomial_band() {
    let n = 100_000;
    let d = eusilc_fixture(n, 21).unwrap();
    // About 90 cells are checked, so a few 3-sigma exceedances are expected by chance.
    let (mut cells, mut outside) = (0, 0);
    for (v, m) in eusilc_marginals().iter().enumerate() {
        let mut counts = vec![0usize; m.probabilities().len()];
        for c in d.column(v) {
            counts[c as usize] += 1;
        }
        for (&p, &c) in m.probabilities().iter().zip(&counts) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let f = c as f64 / n as f64;
            cells += 1;
            if (f - p).abs() > 3.0 * se + 1e-12 {
                outside += 1;
            }
            assert!((f - p).abs() <= 5.0 * se + 1e-12, "{} {f} vs {p}", m.spec().name());
        }
    }
    assert!(outside <= 2, "{outside} of {cells} cells outside 3 sigma");
}

proptest! {
    #[test]
    fn normalize_is_scale_invariant(raw in prop::collection::vec(0.0f64..100.0, 1..50), c in 1e-3f64..1e3) {
        prop_assume!(raw.iter().sum::<f64>() > 0.0);
        let a = normalize_weights(&weighted(raw.clone())).unwrap();
        let b = normalize_weights(&weighted(raw.iter().map(|w| w * c).collect())).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!((a.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
