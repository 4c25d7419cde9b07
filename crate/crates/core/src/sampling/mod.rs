//! Monte Carlo evaluation of integrative sampling strategies.
//!
//! A synthetic population `(x, y)` is stratified on `x` for stratified
//! sampling (SRS within strata, STS estimator) and covered by overlapping
//! frames for multi-frame sampling (Sampford within frames, SM and PML
//! estimators). Both strategies are run under proportional and cost-optimal
//! allocation and compared by Monte Carlo MSE and relative bias.

pub mod allocation;
pub mod estimators;
pub mod frames;
pub mod monte_carlo;
pub mod population;
pub mod sampford;
pub mod srs;
pub mod strata;

pub use allocation::{optimal_cost, proportional, AllocationPlan, AllocationScheme, CostModel};
pub use estimators::{
    estimate_pml, estimate_sm, estimate_sts, pml_domain_sizes, Estimator, FrameSample, PmlEstimate, SampledUnit,
    StratumSample,
};
pub use frames::{build_frames, DomainAssignment, DomainSpec, FrameLayout, Frames};
pub use monte_carlo::{
    run_monte_carlo, run_on_population, EstimatorRunResult, Scenario, SchemeAllocation, SimulationReport, SizeMeasure,
};
pub use population::{generate_population, Population, PopulationConfig};
pub use sampford::{inclusion_probabilities, sampford_sample, SampfordDesign, SampfordSample};
pub use srs::{srs_draw, srs_sample};
pub use strata::{stratify, Strata};
