//! The `surveykit` command line.
//!
//! Every command writes its reports into `--out` and prints a short summary
//! on stdout. On failure a JSON error report goes to stderr and the exit code
//! is 1 (2 for argument errors).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use surveykit_core::autoencoder::TrainingConfig;
use surveykit_core::dataset::{normalize_weights, CategoricalDataset, NormalizedWeights};
use surveykit_core::entropy::entropy_report;
use surveykit_core::fixtures;
use surveykit_core::kpca::KernelConfig;
use surveykit_core::labeling::{
    internal_validation, permutation_importance, stability_validation_on, two_means_1d, AeDetector, Detector,
    FittedPipeline, KpcaDetector, RefitMode, ScoreModel, DEFAULT_PERMUTATIONS,
};
use surveykit_core::profiling::{medoids, select_k, SpectralConfig, DEFAULT_K_MAX};
use surveykit_core::rng::{derive_seed, seeded};
use surveykit_core::sampling::{run_monte_carlo, Scenario};
use surveykit_core::Error;

use crate::error::{AppError, AppResult};
use crate::model::{save_model, ModelFile};
use crate::report::{self, DetectorSettings, EntropyReport, LabelingReport, ScoresReport};
use crate::scenario::{format_scenario, read_scenario, LoadedScenario};
use crate::specfile::{read_specs, write_specs};
use crate::table::{read_dataset, save_dataset, DEFAULT_WEIGHT_COLUMN};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "SURVEYKIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "surveykit", version, about = "Anomaly detection in weighted categorical survey data and multi-frame sampling simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score rows (or variables) and split them into typical and atypical.
    Detect(DetectArgs),
    /// Leave-one-out stability or k-fold internal validation of a detector.
    Validate(ValidateArgs),
    /// Permutation importance of each variable for the atypical labeling.
    Importance(ImportanceArgs),
    /// Spectral clustering of the atypical rows, with medoids.
    Profile(ProfileArgs),
    /// Monte Carlo comparison of stratified and multi-frame designs.
    Simulate(SimulateArgs),
    /// Write a synthetic dataset and its spec file.
    Fixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorKind {
    Entropy,
    Kpca,
    Ae,
}

impl DetectorKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Entropy => "entropy",
            Self::Kpca => "kpca",
            Self::Ae => "ae",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Microdata CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Variable spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Name of the survey weight column; unit weights if absent from the file.
    #[arg(long, default_value = DEFAULT_WEIGHT_COLUMN)]
    pub weights_col: String,
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    #[arg(long, value_enum)]
    pub detector: DetectorKind,
    /// Hamming kernel bandwidth (kpca).
    #[arg(long, default_value_t = KernelConfig::default().gamma)]
    pub gamma: f64,
    /// Share of kernel variance kept by the principal components (kpca).
    #[arg(long, default_value_t = KernelConfig::default().variance_fraction)]
    pub variance_fraction: f64,
    /// Training epochs (ae).
    #[arg(long, default_value_t = TrainingConfig::default().epochs)]
    pub epochs: usize,
    /// Learning rate (ae).
    #[arg(long, default_value_t = TrainingConfig::default().learning_rate)]
    pub lr: f64,
    /// Master seed; required by stochastic steps.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Refit {
    /// Refit the detector without the left-out item.
    Full,
    /// Keep the full-data scores and only recompute the threshold.
    Threshold,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// `loo`, `loo:<m>` (m seeded left-out items), `kfold` (10 folds) or `kfold:<k>`.
    #[arg(long, default_value = "loo")]
    pub scheme: String,
    /// What leave-one-out recomputes.
    #[arg(long, value_enum, default_value_t = Refit::Full)]
    pub refit: Refit,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Permutations per variable.
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub reps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Largest number of subgroups tried.
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML scenario; the built-in default scenario when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario's replication count.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Overrides the scenario's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// Independent draws from the household survey marginals.
    Eusilc,
    /// Survey marginals with a block of rows forced to rare categories.
    Anomalies,
    /// Repeated typical patterns plus isolated atypical rows.
    Separable,
    /// Repeated typical patterns plus four planted atypical subgroups.
    Subgroups,
}

#[derive(Debug, Clone, Args)]
pub struct FixtureArgs {
    #[arg(long, value_enum, default_value_t = FixtureKind::Eusilc)]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = fixtures::EUSILC_ROWS)]
    pub rows: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Share of rows overwritten by the `anomalies` fixture.
pub const ANOMALY_SHARE: f64 = 0.02;

/// Synthetic survey rows where a few records take rare categories everywhere.
pub fn anomaly_fixture(rows: usize, seed: u64) -> AppResult<fixtures::Injected> {
    let d = fixtures::eusilc_fixture(rows, derive_seed(seed, &[0]))?;
    let count = ((rows as f64 * ANOMALY_SHARE).round() as usize).max(1);
    Ok(fixtures::scatter_rare(&d, count, derive_seed(seed, &[1]))?)
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

fn create_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn load(data: &DataArgs) -> AppResult<(CategoricalDataset, NormalizedWeights)> {
    let specs = read_specs(&data.spec)?;
    let d = read_dataset(&data.input, specs, &data.weights_col)?;
    if d.n_rows() < 2 {
        return Err(Error::TooFewItems {
            needed: 2,
            got: d.n_rows(),
        }
        .into());
    }
    let w = normalize_weights(&d)?;
    Ok((d, w))
}

impl DetectorArgs {
    fn require_seed(&self, why: &str) -> AppResult<u64> {
        self.seed.ok_or_else(|| usage(format!("--seed is required {why}")))
    }

    fn kernel(&self) -> KpcaDetector {
        KpcaDetector {
            config: KernelConfig {
                gamma: self.gamma,
                variance_fraction: self.variance_fraction,
            },
        }
    }

    fn autoencoder(&self) -> AppResult<AeDetector> {
        let seed = self.require_seed("for the ae detector")?;
        Ok(AeDetector {
            config: TrainingConfig {
                epochs: self.epochs,
                learning_rate: self.lr,
                seed,
                ..TrainingConfig::default()
            },
        })
    }

    fn settings(&self) -> DetectorSettings {
        let (kpca, ae) = (self.detector == DetectorKind::Kpca, self.detector == DetectorKind::Ae);
        DetectorSettings {
            detector: self.detector.as_str().into(),
            gamma: kpca.then_some(self.gamma),
            variance_fraction: kpca.then_some(self.variance_fraction),
            epochs: ae.then_some(self.epochs),
            learning_rate: ae.then_some(self.lr),
            seed: self.seed,
        }
    }

    fn row_level(&self, command: &str) -> AppResult<()> {
        if self.detector == DetectorKind::Entropy {
            return Err(usage(format!(
                "{command} needs a row-level detector (kpca or ae); entropy scores variables"
            )));
        }
        Ok(())
    }
}

/// Runs `f` with whichever row-level detector the arguments select.
macro_rules! with_detector {
    ($args:expr, |$det:ident| $body:expr) => {
        match $args.detector {
            DetectorKind::Kpca => {
                let $det = $args.kernel();
                $body
            }
            DetectorKind::Ae => {
                let $det = $args.autoencoder()?;
                $body
            }
            DetectorKind::Entropy => unreachable!("checked by row_level"),
        }
    };
}

pub fn cmd_detect(a: &DetectArgs) -> AppResult<String> {
    let (d, w) = load(&a.data)?;
    create_dir(&a.out)?;
    let settings = a.detector.settings();
    if a.detector.detector == DetectorKind::Entropy {
        let entries = entropy_report(&d, &w)?;
        let scores: Vec<f64> = entries.iter().map(|e| e.gamma1.score).collect();
        let names: Vec<String> = entries.iter().map(|e| e.variable.clone()).collect();
        let labeling = two_means_1d(&scores)?;
        let table = EntropyReport::new(&entries, &labeling.labels);
        report::write_json(
            &a.out.join("scores.json"),
            &ScoresReport::variables(settings.clone(), &names, &scores),
        )?;
        report::write_json(
            &a.out.join("labeling.json"),
            &LabelingReport::new(settings, "variables", &labeling, Some(&names)),
        )?;
        report::write_json(&a.out.join("entropy.json"), &table)?;
        return Ok(table.table());
    }
    let (scores, model) = match a.detector.detector {
        DetectorKind::Kpca => {
            let f = a.detector.kernel().fit(&d, &w)?;
            (f.scores, ModelFile::from_kpca(&f.model))
        }
        _ => {
            let f = a.detector.autoencoder()?.fit(&d, &w)?;
            (f.scores, ModelFile::from_ae(&f.model))
        }
    };
    let labeling = two_means_1d(&scores)?;
    report::write_json(&a.out.join("scores.json"), &ScoresReport::rows(settings.clone(), &scores))?;
    report::write_json(
        &a.out.join("labeling.json"),
        &LabelingReport::new(settings, "rows", &labeling, None),
    )?;
    save_model(&a.out.join("model.json"), &model)?;
    Ok(format!(
        "{} of {} rows atypical (boundary {})\n",
        labeling.atypical_count(),
        d.n_rows(),
        labeling.boundary
    ))
}

enum ParsedScheme {
    Loo(Option<usize>),
    KFold(usize),
}

fn parse_scheme(s: &str) -> AppResult<ParsedScheme> {
    let (name, arg) = match s.split_once(':') {
        Some((n, v)) => (
            n,
            Some(v.parse::<usize>().map_err(|_| usage(format!("bad count in --scheme {s:?}")))?),
        ),
        None => (s, None),
    };
    match name {
        "loo" => Ok(ParsedScheme::Loo(arg)),
        "kfold" => Ok(ParsedScheme::KFold(arg.unwrap_or(10))),
        _ => Err(usage(format!("unknown --scheme {s:?} (expected loo, loo:<m>, kfold or kfold:<k>)"))),
    }
}

pub fn cmd_validate(a: &ValidateArgs) -> AppResult<String> {
    a.detector.row_level("validate")?;
    let scheme = parse_scheme(&a.scheme)?;
    let (d, w) = load(&a.data)?;
    create_dir(&a.out)?;
    let n = d.n_rows();
    let (result, refit) = match scheme {
        ParsedScheme::Loo(m) => {
            let left_out: Vec<usize> = match m {
                None => (0..n).collect(),
                Some(m) => {
                    let seed = a.detector.require_seed("for loo:<m>")?;
                    if m == 0 || m > n {
                        return Err(usage(format!("loo:<m> needs 1 <= m <= {n}")));
                    }
                    let mut v = sample(&mut seeded(derive_seed(seed, &[2])), n, m).into_vec();
                    v.sort_unstable();
                    v
                }
            };
            let mode = match a.refit {
                Refit::Full => RefitMode::Full,
                Refit::Threshold => RefitMode::ThresholdOnly,
            };
            let r = with_detector!(a.detector, |det| stability_validation_on(&det, &d, &w, mode, &left_out)?);
            let refit = match a.refit {
                Refit::Full => "full",
                Refit::Threshold => "threshold",
            };
            (r, Some(refit))
        }
        ParsedScheme::KFold(k) => {
            let seed = a.detector.require_seed("for k-fold validation")?;
            let r = with_detector!(a.detector, |det| internal_validation(&det, &d, &w, k, derive_seed(seed, &[3]))?);
            (r, None)
        }
    };
    let json = report::ValidationJson::new(a.detector.settings(), &result, refit);
    report::write_json(&a.out.join("validation.json"), &json)?;
    Ok(format!(
        "MCC {} [{}, {}] over {} iterations\n",
        result.mcc_mean,
        result.mcc_ci_low,
        result.mcc_ci_high,
        result.per_iteration.len()
    ))
}

fn importance_of<D: Detector>(det: &D, d: &CategoricalDataset, w: &NormalizedWeights, reps: usize, seed: u64) -> AppResult<surveykit_core::labeling::ImportanceReport>
where
    D::Model: ScoreModel,
{
    let pipeline = FittedPipeline::fit(det, d, w)?;
    Ok(permutation_importance(&pipeline, d, reps, seed)?)
}

pub fn cmd_importance(a: &ImportanceArgs) -> AppResult<String> {
    a.detector.row_level("importance")?;
    let seed = a.detector.require_seed("for permutation importance")?;
    let (d, w) = load(&a.data)?;
    create_dir(&a.out)?;
    let r = with_detector!(a.detector, |det| importance_of(&det, &d, &w, a.reps, derive_seed(seed, &[4]))?);
    let json = report::ImportanceJson::new(a.detector.settings(), &r);
    report::write_json(&a.out.join("importance.json"), &json)?;
    report::write_importance_csv(&a.out.join("importance.csv"), &json)?;
    let mut msg = String::new();
    if a.reps < 5 {
        msg.push_str(&format!(
            "warning: jackknife interval computed over only {} permutations\n",
            a.reps
        ));
    }
    for i in r.ranking().into_iter().take(5) {
        let v = &r.variables[i];
        msg.push_str(&format!("{} {} [{}, {}]\n", v.variable, v.mean, v.ci_low, v.ci_high));
    }
    Ok(msg)
}

pub fn cmd_profile(a: &ProfileArgs) -> AppResult<String> {
    a.detector.row_level("profile")?;
    let seed = a.detector.require_seed("for spectral clustering")?;
    let (d, w) = load(&a.data)?;
    create_dir(&a.out)?;
    let scores = with_detector!(a.detector, |det| det.fit(&d, &w)?.scores);
    let rows = two_means_1d(&scores)?.atypical_indices();
    let mut note = String::new();
    if rows.len() < 3 {
        return Err(Error::TooFewItems {
            needed: 3,
            got: rows.len(),
        }
        .into());
    }
    let k_max = a.k_max.min(rows.len() - 1);
    if k_max < a.k_max {
        note = format!("warning: k_max lowered to {k_max} for {} atypical rows\n", rows.len());
    }
    let cfg = SpectralConfig {
        seed: derive_seed(seed, &[5]),
        ..SpectralConfig::default()
    };
    let partition = select_k(&d, &rows, k_max, &cfg)?;
    let meds = medoids(&d, &partition.rows, &partition.assignment)?;
    let names: Vec<&str> = d.specs().iter().map(|s| s.name()).collect();
    report::write_json(
        &a.out.join("profile.json"),
        &report::ProfileJson::new(a.detector.settings(), &partition, &names, &meds),
    )?;
    report::write_subgroups_csv(&a.out.join("subgroups.csv"), &partition)?;
    report::write_medoids_csv(&a.out.join("medoids.csv"), &names, &meds)?;
    Ok(format!("{note}{} subgroups among {} atypical rows\n", partition.k, rows.len()))
}

pub fn cmd_simulate(a: &SimulateArgs) -> AppResult<String> {
    let LoadedScenario {
        mut scenario,
        schemes,
        estimators,
    } = match &a.scenario {
        Some(path) => read_scenario(path)?,
        None => {
            if a.seed.is_none() {
                return Err(usage("--seed is required when no --scenario is given"));
            }
            LoadedScenario {
                scenario: Scenario::default(),
                schemes: surveykit_core::sampling::AllocationScheme::ALL.to_vec(),
                estimators: surveykit_core::sampling::Estimator::ALL.to_vec(),
            }
        }
    };
    if let Some(m) = a.replications {
        scenario.replications = m;
    }
    if let Some(s) = a.seed {
        scenario.seed = s;
    }
    scenario.validate()?;
    create_dir(&a.out)?;
    let result = run_monte_carlo(&scenario)?;
    let summary = report::SimulationSummary::new(&result, scenario.seed, scenario.replications, &schemes, &estimators);
    report::write_json(&a.out.join("summary.json"), &summary)?;
    report::write_simulation_csvs(&a.out, &report::selected(&result, &schemes, &estimators))?;
    let path = a.out.join("scenario.toml");
    std::fs::write(&path, format_scenario(&scenario)).map_err(|e| AppError::io(&path, e))?;
    let mut msg = summary.table();
    for w in &summary.warnings {
        msg.push_str(&format!("warning: {w}\n"));
    }
    Ok(msg)
}

pub fn cmd_fixture(a: &FixtureArgs) -> AppResult<String> {
    create_dir(&a.out)?;
    let (d, truth): (CategoricalDataset, Option<Vec<String>>) = match a.kind {
        FixtureKind::Eusilc => (fixtures::eusilc_fixture(a.rows, a.seed)?, None),
        FixtureKind::Anomalies => {
            let inj = anomaly_fixture(a.rows, a.seed)?;
            let truth = (0..a.rows).map(|i| u8::from(inj.rows.binary_search(&i).is_ok()).to_string()).collect();
            (inj.data, Some(truth))
        }
        FixtureKind::Separable => {
            let atypical = (a.rows / 40).max(1).min(a.rows);
            let (d, t) = fixtures::separable_fixture(a.rows - atypical, atypical, 8, a.seed)?;
            (d, Some(t.iter().map(|&b| u8::from(b).to_string()).collect()))
        }
        FixtureKind::Subgroups => {
            let size = (a.rows / 100).max(2);
            let typical = a.rows.saturating_sub(4 * size);
            let (d, t) = fixtures::subgroup_fixture(typical, 4, size, 12, 0.1, a.seed)?;
            let truth = t.iter().map(|g| g.map_or_else(|| "-1".to_string(), |g| g.to_string())).collect();
            (d, Some(truth))
        }
    };
    if let Some(truth) = truth {
        let rows = truth.into_iter().enumerate().map(|(i, t)| vec![i.to_string(), t]);
        report::write_csv(&a.out.join("truth.csv"), &["row", "truth"], rows)?;
    }
    write_specs(&a.out.join("data.spec"), d.specs())?;
    save_dataset(&a.out.join("data.csv"), &d, DEFAULT_WEIGHT_COLUMN)?;
    Ok(format!("{} rows, {} variables\n", d.n_rows(), d.n_vars()))
}

fn configure_threads() -> AppResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

pub fn run(cli: &Cli) -> AppResult<String> {
    configure_threads()?;
    match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Importance(a) => cmd_importance(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fixture(a) => cmd_fixture(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(msg) => {
            print!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::to_string(&report::ErrorReport::new(&e)).expect("error report serializes");
            eprintln!("{body}");
            ExitCode::from(if matches!(e, AppError::Usage(_)) { 2 } else { 1 })
        }
    }
}
