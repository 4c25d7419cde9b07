//! Report schemas.
//!
//! JSON reports carry `schema_version` and are written with a trailing
//! newline. CSV reports have a header row and use `\n` line endings. Floats
//! are printed in their shortest round-trip form, so equal inputs give equal
//! bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use surveykit_core::entropy::VariableEntropy;
use surveykit_core::labeling::{ImportanceReport, OutlierLabeling, Scheme, ValidationReport};
use surveykit_core::profiling::{Medoid, SubgroupPartition};
use surveykit_core::sampling::{AllocationScheme, Estimator, EstimatorRunResult, SimulationReport};

use crate::error::{AppError, AppResult};
use crate::SCHEMA_VERSION;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Writes a header and rows of already formatted cells.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> AppResult<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| AppError::Csv(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| AppError::Csv(e.to_string());
    wtr.write_record(header).map_err(csv_err)?;
    for row in rows {
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| AppError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

impl ErrorReport {
    pub fn new(e: &AppError) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            error: ErrorBody {
                kind: e.kind().into(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorSettings {
    pub detector: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Scores per row, or per variable for the entropy detector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoresReport {
    pub schema_version: u32,
    pub settings: DetectorSettings,
    /// `[{row_id, re_kpca}]`, `[{row_id, re_ae}]` or `[{variable, gamma1}]`.
    pub scores: Vec<serde_json::Value>,
}

impl ScoresReport {
    pub fn rows(settings: DetectorSettings, scores: &[f64]) -> Self {
        let key = format!("re_{}", settings.detector);
        let scores = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut m = serde_json::Map::new();
                m.insert("row_id".into(), i.into());
                m.insert(key.clone(), s.into());
                serde_json::Value::Object(m)
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            settings,
            scores,
        }
    }

    pub fn variables(settings: DetectorSettings, names: &[String], scores: &[f64]) -> Self {
        let scores = names
            .iter()
            .zip(scores)
            .map(|(n, &s)| serde_json::json!({ "variable": n, "gamma1": s }))
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            settings,
            scores,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelingReport {
    pub schema_version: u32,
    pub settings: DetectorSettings,
    pub unit: &'static str,
    pub low_centroid: f64,
    pub high_centroid: f64,
    pub boundary: f64,
    pub atypical_count: usize,
    /// 0-based positions of the atypical items.
    pub atypical: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atypical_names: Option<Vec<String>>,
}

impl LabelingReport {
    pub fn new(settings: DetectorSettings, unit: &'static str, l: &OutlierLabeling, names: Option<&[String]>) -> Self {
        let atypical = l.atypical_indices();
        Self {
            schema_version: SCHEMA_VERSION,
            settings,
            unit,
            low_centroid: l.low_centroid,
            high_centroid: l.high_centroid,
            boundary: l.boundary,
            atypical_count: atypical.len(),
            atypical_names: names.map(|n| atypical.iter().map(|&i| n[i].clone()).collect()),
            atypical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryEntry {
    pub label: String,
    pub freq: f64,
    /// `-ln freq` in nats; `null` for unobserved categories.
    pub info_nats: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableEntry {
    pub variable: String,
    pub gamma1: f64,
    pub observed_categories: usize,
    pub degenerate: bool,
    pub cluster_label: &'static str,
    pub categories: Vec<CategoryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub schema_version: u32,
    pub variables: Vec<VariableEntry>,
}

impl EntropyReport {
    pub fn new(entries: &[VariableEntropy], atypical: &[bool]) -> Self {
        let variables = entries
            .iter()
            .zip(atypical)
            .map(|(e, &a)| VariableEntry {
                variable: e.variable.clone(),
                gamma1: e.gamma1.score,
                observed_categories: e.gamma1.observed,
                degenerate: e.gamma1.degenerate,
                cluster_label: if a { "Atypical" } else { "Typical" },
                categories: e
                    .categories
                    .iter()
                    .map(|c| CategoryEntry {
                        label: c.label.clone(),
                        freq: c.freq,
                        info_nats: c.info_nats.is_finite().then_some(c.info_nats),
                    })
                    .collect(),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            variables,
        }
    }

    /// Variables by decreasing score, one line each.
    pub fn table(&self) -> String {
        let mut order: Vec<&VariableEntry> = self.variables.iter().collect();
        order.sort_by(|a, b| b.gamma1.total_cmp(&a.gamma1).then_with(|| a.variable.cmp(&b.variable)));
        let width = order.iter().map(|v| v.variable.len()).max().unwrap_or(8).max(8);
        let mut s = format!("{:<width$}  {:>8}  cluster\n", "variable", "gamma1");
        for v in order {
            let _ = writeln!(s, "{:<width$}  {:>8.6}  {}", v.variable, v.gamma1, v.cluster_label);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationJson {
    pub schema_version: u32,
    pub settings: DetectorSettings,
    pub scheme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refit: Option<String>,
    pub mcc_mean: f64,
    pub mcc_ci_low: f64,
    pub mcc_ci_high: f64,
    pub degenerate_iterations: usize,
    pub per_iteration: Vec<f64>,
}

impl ValidationJson {
    pub fn new(settings: DetectorSettings, r: &ValidationReport, refit: Option<&str>) -> Self {
        let (scheme, folds) = match r.scheme {
            Scheme::LeaveOneOut => ("loo".to_string(), None),
            Scheme::KFold(k) => ("kfold".to_string(), Some(k)),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            settings,
            scheme,
            folds,
            refit: refit.map(str::to_string),
            mcc_mean: r.mcc_mean,
            mcc_ci_low: r.mcc_ci_low,
            mcc_ci_high: r.mcc_ci_high,
            degenerate_iterations: r.degenerate,
            per_iteration: r.per_iteration.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceEntry {
    pub variable: String,
    pub average_importance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceJson {
    pub schema_version: u32,
    pub settings: DetectorSettings,
    pub permutations: usize,
    /// Sorted by decreasing average importance.
    pub variables: Vec<ImportanceEntry>,
}

impl ImportanceJson {
    pub fn new(settings: DetectorSettings, r: &ImportanceReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            settings,
            permutations: r.permutations,
            variables: r
                .ranking()
                .into_iter()
                .map(|i| {
                    let v = &r.variables[i];
                    ImportanceEntry {
                        variable: v.variable.clone(),
                        average_importance: v.mean,
                        ci_low: v.ci_low,
                        ci_high: v.ci_high,
                        replicates: v.replicates.clone(),
                    }
                })
                .collect(),
        }
    }
}

pub fn write_importance_csv(path: &Path, r: &ImportanceJson) -> AppResult<()> {
    let rows = r.variables.iter().map(|v| {
        vec![
            v.variable.clone(),
            v.average_importance.to_string(),
            v.ci_low.to_string(),
            v.ci_high.to_string(),
        ]
    });
    write_csv(path, &["variable", "average_importance", "ci_low", "ci_high"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileJson {
    pub schema_version: u32,
    pub settings: DetectorSettings,
    pub profiled_rows: usize,
    pub k: usize,
    pub silhouettes: Vec<SilhouetteEntry>,
    pub medoids: Vec<MedoidEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SilhouetteEntry {
    pub k: usize,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedoidEntry {
    pub subgroup: usize,
    pub size: usize,
    pub row_id: usize,
    pub profile: Vec<(String, String)>,
}

impl ProfileJson {
    pub fn new(settings: DetectorSettings, p: &SubgroupPartition, names: &[&str], medoids: &[Medoid]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            settings,
            profiled_rows: p.rows.len(),
            k: p.k,
            silhouettes: p
                .silhouettes
                .iter()
                .map(|&(k, silhouette)| SilhouetteEntry { k, silhouette })
                .collect(),
            medoids: medoids
                .iter()
                .map(|m| MedoidEntry {
                    subgroup: m.cluster,
                    size: m.size,
                    row_id: m.row,
                    profile: names.iter().map(|n| n.to_string()).zip(m.labels.iter().cloned()).collect(),
                })
                .collect(),
        }
    }
}

pub fn write_subgroups_csv(path: &Path, p: &SubgroupPartition) -> AppResult<()> {
    let rows = p.rows.iter().zip(&p.assignment).map(|(r, c)| vec![r.to_string(), c.to_string()]);
    write_csv(path, &["row_id", "subgroup"], rows)
}

/// Variables down, subgroups across; the first two lines give each
/// subgroup's size and medoid row.
pub fn write_medoids_csv(path: &Path, names: &[&str], medoids: &[Medoid]) -> AppResult<()> {
    let titles: Vec<String> = medoids.iter().map(|m| format!("subgroup_{}", m.cluster)).collect();
    let mut header = vec!["variable"];
    header.extend(titles.iter().map(String::as_str));
    let mut rows = vec![
        std::iter::once("size".to_string()).chain(medoids.iter().map(|m| m.size.to_string())).collect::<Vec<_>>(),
        std::iter::once("row_id".to_string()).chain(medoids.iter().map(|m| m.row.to_string())).collect(),
    ];
    for (v, name) in names.iter().enumerate() {
        rows.push(std::iter::once(name.to_string()).chain(medoids.iter().map(|m| m.labels[v].clone())).collect());
    }
    write_csv(path, &header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationEntry {
    pub scheme: &'static str,
    pub strata: Vec<usize>,
    pub frames: Vec<usize>,
    pub strata_targets: Vec<f64>,
    pub frame_targets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEntry {
    pub scheme: &'static str,
    pub estimator: &'static str,
    pub replications: usize,
    pub mse: f64,
    pub relative_bias: f64,
    pub mean_estimate: f64,
    pub standard_error: f64,
    pub p5: f64,
    pub p95: f64,
    pub mse_p5: f64,
    pub mse_p95: f64,
    pub reliable: bool,
}

impl ResultEntry {
    fn new(r: &EstimatorRunResult) -> Self {
        Self {
            scheme: r.scheme.as_str(),
            estimator: r.estimator.as_str(),
            replications: r.replications(),
            mse: r.mse,
            relative_bias: r.relative_bias,
            mean_estimate: r.mean_estimate(),
            standard_error: r.standard_error(),
            p5: r.p5,
            p95: r.p95,
            mse_p5: r.mse_p5,
            mse_p95: r.mse_p95,
            reliable: r.reliable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub replications: usize,
    pub true_mean: f64,
    pub strata_sizes: Vec<usize>,
    pub frame_sizes: Vec<usize>,
    pub allocations: Vec<AllocationEntry>,
    pub results: Vec<ResultEntry>,
    pub warnings: Vec<String>,
}

/// Results restricted to the requested schemes and estimators, in that order.
pub fn selected<'a>(
    report: &'a SimulationReport,
    schemes: &[AllocationScheme],
    estimators: &[Estimator],
) -> Vec<&'a EstimatorRunResult> {
    schemes
        .iter()
        .flat_map(|&s| estimators.iter().filter_map(move |&e| report.result(s, e)))
        .collect()
}

impl SimulationSummary {
    pub fn new(
        report: &SimulationReport,
        seed: u64,
        replications: usize,
        schemes: &[AllocationScheme],
        estimators: &[Estimator],
    ) -> Self {
        let mut warnings = report.warnings.clone();
        if replications < 2 {
            warnings.push(format!(
                "only {replications} replication: MSE, bias and percentiles are not reliable"
            ));
        }
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            replications,
            true_mean: report.true_mean,
            strata_sizes: report.strata_sizes.clone(),
            frame_sizes: report.frame_sizes.clone(),
            allocations: report
                .allocations
                .iter()
                .filter(|a| schemes.contains(&a.scheme))
                .map(|a| AllocationEntry {
                    scheme: a.scheme.as_str(),
                    strata: a.strata.sizes.clone(),
                    frames: a.frames.sizes.clone(),
                    strata_targets: a.strata.targets.clone(),
                    frame_targets: a.frames.targets.clone(),
                })
                .collect(),
            results: selected(report, schemes, estimators).into_iter().map(ResultEntry::new).collect(),
            warnings,
        }
    }

    /// MSE and its bootstrap percentiles in units of 1e-6, plus relative bias.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<13} {:<9} {:>12} {:>12} {:>12} {:>11}\n",
            "allocation", "estimator", "MSE x1e-6", "P5 x1e-6", "P95 x1e-6", "RB"
        );
        for r in &self.results {
            let _ = writeln!(
                s,
                "{:<13} {:<9} {:>12.2} {:>12.2} {:>12.2} {:>11.2e}{}",
                r.scheme,
                r.estimator,
                r.mse * 1e6,
                r.mse_p5 * 1e6,
                r.mse_p95 * 1e6,
                r.relative_bias,
                if r.reliable { "" } else { "  (unreliable)" }
            );
        }
        s
    }
}

/// Per-replication estimates, the running mean trace and relative errors.
pub fn write_simulation_csvs(dir: &Path, results: &[&EstimatorRunResult]) -> AppResult<()> {
    let long = |f: &dyn Fn(&EstimatorRunResult, usize) -> f64| {
        results
            .iter()
            .flat_map(|r| {
                (0..r.replications()).map(move |i| {
                    vec![
                        r.scheme.as_str().to_string(),
                        r.estimator.as_str().to_string(),
                        (i + 1).to_string(),
                        f(r, i).to_string(),
                    ]
                })
            })
            .collect::<Vec<_>>()
    };
    write_csv(
        &dir.join("replications.csv"),
        &["scheme", "estimator", "replication", "estimate"],
        long(&|r, i| r.estimates[i]),
    )?;
    write_csv(
        &dir.join("convergence.csv"),
        &["scheme", "estimator", "replication", "running_mean"],
        long(&|r, i| r.running_mean[i]),
    )?;
    write_csv(
        &dir.join("relative_bias.csv"),
        &["scheme", "estimator", "replication", "relative_error"],
        long(&|r, i| (r.estimates[i] - r.true_mean) / r.true_mean),
    )
}
