use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use surveykit::specfile::{format_specs, parse_specs};
use surveykit::table::{parse_dataset, write_dataset, DEFAULT_WEIGHT_COLUMN};
use surveykit_core::dataset::{CategoricalDataset, VariableKind, VariableSpec};
use surveykit_core::fixtures::{eusilc_fixture, EUSILC_ROWS};

fn surveykit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surveykit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = surveykit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(dir: &Path, kind: &str, rows: usize, seed: u64) -> (String, String) {
    let out = dir.join(format!("{kind}-{rows}-{seed}"));
    ok(&["fixture", "--kind", kind, "--rows", &rows.to_string(), "--seed", &seed.to_string(), "--out", out.to_str().unwrap()]);
    (
        out.join("data.csv").to_str().unwrap().to_string(),
        out.join("data.spec").to_str().unwrap().to_string(),
    )
}

fn save(d: &CategoricalDataset) -> Vec<u8> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, d, DEFAULT_WEIGHT_COLUMN).unwrap();
    buf
}

#[test]
fn full_size_fixture_round_trips_byte_identically() {
    let d = eusilc_fixture(EUSILC_ROWS, 5).unwrap();
    let d = d.with_weights((0..EUSILC_ROWS).map(|i| 0.5 + (i % 7) as f64 / 3.0).collect()).unwrap();
    let bytes = save(&d);
    let specs = parse_specs(&format_specs(d.specs())).unwrap();
    let back = parse_dataset(bytes.as_slice(), specs, DEFAULT_WEIGHT_COLUMN).unwrap();
    assert_eq!(back, d);
    assert_eq!(save(&back), bytes);
}

fn spec_strategy() -> impl Strategy<Value = Vec<VariableSpec>> {
    prop::collection::vec(2usize..6, 1..5).prop_map(|ks| {
        ks.iter()
            .enumerate()
            .map(|(j, &k)| {
                let labels = (0..k).map(|c| format!("cat {c}, \"{j}\""));
                VariableSpec::new(format!("V{j}"), labels, VariableKind::Nominal).unwrap()
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn load_inverts_save(specs in spec_strategy(), seed in 0u64..1000, n in 1usize..30) {
        let p = specs.len();
        let codes: Vec<u32> = (0..n * p)
            .map(|i| ((i as u64 * 2654435761 + seed) % specs[i % p].category_count() as u64) as u32)
            .collect();
        let weights: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) / (seed as f64 + 3.0)).collect();
        let d = CategoricalDataset::new(specs.clone(), codes, weights).unwrap();
        let back = parse_dataset(save(&d).as_slice(), specs, DEFAULT_WEIGHT_COLUMN).unwrap();
        prop_assert_eq!(back, d);
    }
}

#[test]
fn entropy_detection_flags_the_published_atypical_set() {
    let dir = tempfile::tempdir().unwrap();
    // The 7/12 split is close to the 8/11 one; some seeds also flag RISKPOV.
    let (csv, spec) = fixture(dir.path(), "eusilc", EUSILC_ROWS, 1);
    let out = dir.path().join("entropy");
    ok(&["detect", "--input", &csv, "--spec", &spec, "--detector", "entropy", "--out", out.to_str().unwrap()]);
    let labeling = json(&out.join("labeling.json"));
    let mut names: Vec<String> = labeling["atypical_names"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    names.sort();
    assert_eq!(names, ["CITTADX", "ITA", "NCITT", "SECITT", "SEV_MAT_DEPRIV", "TIPSCU", "VIFAM"]);
    let report = json(&out.join("entropy.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["variables"][0]["cluster_label"], "Atypical");
    // "No" is never observed for VIFAM.
    assert!(report["variables"][0]["categories"][2]["info_nats"].is_null());
}

#[test]
fn row_detectors_write_scores_labels_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = fixture(dir.path(), "separable", 110, 1);
    for det in ["kpca", "ae"] {
        let out = dir.path().join(det);
        ok(&["detect", "--input", &csv, "--spec", &spec, "--detector", det, "--seed", "4", "--epochs", "50", "--out", out.to_str().unwrap()]);
        let scores = json(&out.join("scores.json"));
        assert_eq!(scores["scores"].as_array().unwrap().len(), 110);
        assert!(scores["scores"][3][format!("re_{det}")].is_number());
        assert_eq!(json(&out.join("model.json"))["detector"], det);
    }
}

#[test]
fn errors_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("one.spec");
    std::fs::write(&spec, "variable A\ncategory Yes\ncategory No\n").unwrap();
    let csv = dir.path().join("one.csv");
    std::fs::write(&csv, "A\nYes\n").unwrap();
    let out = dir.path().join("out");
    let args = ["detect", "--input", csv.to_str().unwrap(), "--spec", spec.to_str().unwrap(), "--detector", "entropy", "--out", out.to_str().unwrap()];
    let res = surveykit(&args);
    assert_eq!(res.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "too_few_items");

    std::fs::write(&csv, "A\nYes\nMaybe\n").unwrap();
    let res = surveykit(&args);
    let err: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "unknown_category");

    let res = surveykit(&["detect", "--input", csv.to_str().unwrap(), "--spec", spec.to_str().unwrap(), "--detector", "lof", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn loo_on_separable_fixture_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = fixture(dir.path(), "separable", 400, 2);
    let out = dir.path().join("v");
    ok(&["validate", "--input", &csv, "--spec", &spec, "--detector", "kpca", "--scheme", "loo", "--out", out.to_str().unwrap()]);
    let v = json(&out.join("validation.json"));
    assert_eq!(v["mcc_mean"], 1.0);
    assert_eq!(v["per_iteration"].as_array().unwrap().len(), 400);
}

#[test]
fn importance_with_two_reps_warns() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = fixture(dir.path(), "separable", 200, 2);
    let out = dir.path().join("imp");
    let stdout = ok(&["importance", "--input", &csv, "--spec", &spec, "--detector", "kpca", "--reps", "2", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(stdout.starts_with("warning:"), "{stdout}");
    let text = std::fs::read_to_string(out.join("importance.csv")).unwrap();
    assert!(text.starts_with("variable,average_importance,ci_low,ci_high\n"));
    assert_eq!(text.lines().count(), 9);
    assert_eq!(json(&out.join("importance.json"))["permutations"], 2);
}

#[test]
fn profile_finds_four_subgroups() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, spec) = fixture(dir.path(), "subgroups", 1000, 3);
    let out = dir.path().join("p");
    ok(&["profile", "--input", &csv, "--spec", &spec, "--detector", "kpca", "--seed", "1", "--out", out.to_str().unwrap()]);
    let p = json(&out.join("profile.json"));
    assert_eq!(p["k"], 4);
    assert_eq!(p["profiled_rows"], 40);
    let medoids = std::fs::read_to_string(out.join("medoids.csv")).unwrap();
    assert!(medoids.starts_with("variable,subgroup_0,subgroup_1,subgroup_2,subgroup_3\nsize,10,10,10,10\n"), "{medoids}");
}

#[test]
fn single_replication_is_flagged_unreliable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let stdout = ok(&["simulate", "--replications", "1", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(stdout.contains("unreliable"));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["results"].as_array().unwrap().len(), 6);
    assert!(s["results"].as_array().unwrap().iter().all(|r| r["reliable"] == false));
    for f in ["replications.csv", "convergence.csv", "relative_bias.csv", "scenario.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn scenario_file_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok(&["simulate", "--replications", "2", "--seed", "3", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("scenario.toml")).unwrap();
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, text.replace("sample_size = 600\n", "")).unwrap();
    let res = surveykit(&["simulate", "--scenario", broken.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "scenario_schema");
    assert!(err["error"]["message"].as_str().unwrap().contains("sample_size"));

    // The written scenario reproduces the run.
    let again = dir.path().join("again");
    ok(&["simulate", "--scenario", out.join("scenario.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(out.join("summary.json")).unwrap(),
        std::fs::read(again.join("summary.json")).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let res = Command::new(env!("CARGO_BIN_EXE_surveykit"))
            .env("SURVEYKIT_THREADS", threads)
            .args(["simulate", "--replications", "40", "--seed", "9", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(res.status.success());
        outputs.push(std::fs::read(out.join("replications.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let res = Command::new(env!("CARGO_BIN_EXE_surveykit"))
        .env("SURVEYKIT_THREADS", "zero")
        .args(["simulate", "--seed", "1", "--out", dir.path().join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
}
