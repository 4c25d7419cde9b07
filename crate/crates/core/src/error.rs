use alloc::string::String;

/// Errors raised by the detection, validation and simulation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown category {value:?} for variable {variable:?} at row {row}")]
    UnknownCategory {
        variable: String,
        value: String,
        row: usize,
    },
    #[error("missing cell for variable {variable:?} at row {row}")]
    MissingCell { row: usize, variable: String },
    #[error("negative weight at row {row}")]
    NegativeWeight { row: usize },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid variable spec: {0}")]
    InvalidSpec(String),
    #[error("all survey weights are zero")]
    AllZeroWeights,
    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),
    #[error("variable index {index} out of range for {count} variables")]
    BadVariableIndex { index: usize, count: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("kernel matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("all scores are equal; no two-cluster split exists")]
    AllEqualScores,
    #[error("non-finite score at position {0}")]
    NonFiniteScore(usize),
    #[error("too few items: need {needed}, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("silhouette needs at least two non-empty clusters")]
    SingleCluster,
    #[error("infeasible domain configuration: {0}")]
    InfeasibleDomains(String),
    #[error("budget {budget} cannot cover the minimum allocation cost {minimum}")]
    BudgetInfeasible { budget: f64, minimum: f64 },
    #[error("sample size {requested} exceeds population size {available}")]
    OversizedSample { requested: usize, available: usize },
    #[error("sample size must be positive")]
    EmptySample,
    #[error("Sampford procedure exhausted {0} retries")]
    RetryExhausted(usize),
    #[error("invalid size measure: {0}")]
    InvalidSizeMeasure(String),
    #[error("stratum {0} has an empty sample")]
    EmptyStratumSample(usize),
    #[error("zero inclusion probability for a sampled unit")]
    ZeroInclusionProbability,
    #[error("pseudo-likelihood solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
