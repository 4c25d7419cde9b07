use std::path::PathBuf;

/// Errors of the file formats and the command line.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] surveykit_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("spec file line {line}: {message}")]
    SpecSyntax { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("model file: {0}")]
    Model(String),
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable category, used in error reports.
    pub fn kind(&self) -> &'static str {
        use surveykit_core::Error as E;
        match self {
            Self::Core(e) => match e {
                E::UnknownCategory { .. } => "unknown_category",
                E::MissingCell { .. } => "missing_cell",
                E::NegativeWeight { .. } => "negative_weight",
                E::SchemaMismatch(_) => "schema_mismatch",
                E::AllZeroWeights => "all_zero_weights",
                E::TooFewItems { .. } => "too_few_items",
                E::NonConvergence { .. } => "non_convergence",
                E::BudgetInfeasible { .. } => "budget_infeasible",
                E::InfeasibleDomains(_) => "infeasible_domains",
                _ => "invalid_input",
            },
            Self::Io { .. } => "io",
            Self::SpecSyntax { .. } => "spec_syntax",
            Self::Csv(_) => "csv",
            Self::Json(_) => "json",
            Self::Scenario(_) => "scenario_schema",
            Self::Model(_) => "model",
            Self::Usage(_) => "usage",
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
