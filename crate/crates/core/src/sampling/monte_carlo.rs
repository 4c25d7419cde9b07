//! Monte Carlo comparison of the stratified and multi-frame strategies.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::parallel::map_indexed;
use crate::rng::{self, derive_seed};
use crate::sampling::allocation::{self, AllocationPlan, AllocationScheme, CostModel};
use crate::sampling::estimators::{self, Estimator, FrameSample, SampledUnit, StratumSample};
use crate::sampling::frames::{build_frames, FrameLayout, Frames};
use crate::sampling::population::{generate_population, Population, PopulationConfig};
use crate::sampling::sampford::SampfordDesign;
use crate::sampling::srs::srs_draw;
use crate::sampling::strata::{stratify, Strata};
use crate::stats::{self, compensated_sum};
use crate::{Error, Result};

pub const DEFAULT_REPLICATIONS: usize = 2500;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_SAMPLE_SIZE: usize = 600;
/// Domain sizes `{1}, {1,2}, {2}, {2,3}, {3}` of the default chain layout.
pub const DEFAULT_DOMAIN_SIZES: [usize; 5] = [985, 10, 975, 10, 1020];

/// Size measure used by the Sampford designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeMeasure {
    /// Equal sizes: `pi = n_q / N_q`.
    Uniform,
    /// Proportional to the design variable `x`.
    DesignVariable,
}

impl SizeMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::DesignVariable => "x",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(Self::Uniform),
            "x" => Some(Self::DesignVariable),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub population: PopulationConfig,
    pub strata: usize,
    pub layout: FrameLayout,
    /// Total sample size of the proportional scheme.
    pub sample_size: usize,
    /// Cost model of the optimal scheme.
    pub costs: CostModel,
    pub size_measure: SizeMeasure,
    pub replications: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            population: PopulationConfig::default(),
            strata: 3,
            layout: FrameLayout::chain(&DEFAULT_DOMAIN_SIZES).expect("valid chain"),
            sample_size: DEFAULT_SAMPLE_SIZE,
            costs: CostModel {
                fixed: 0.0,
                unit: vec![9.5, 10.0, 10.5],
                budget: 6000.0,
            },
            size_measure: SizeMeasure::Uniform,
            replications: DEFAULT_REPLICATIONS,
            bootstrap: DEFAULT_BOOTSTRAP,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.population.validate()?;
        self.layout.validate(self.population.size)?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if self.costs.unit.len() != self.strata || self.layout.frames != self.strata {
            return Err(Error::InvalidConfig(format!(
                "strata ({}), frames ({}) and unit costs ({}) must agree",
                self.strata,
                self.layout.frames,
                self.costs.unit.len()
            )));
        }
        if self.sample_size == 0 {
            return Err(Error::EmptySample);
        }
        if self.sample_size > self.population.size {
            return Err(Error::OversizedSample {
                requested: self.sample_size,
                available: self.population.size,
            });
        }
        let minimum = self.costs.cost(&vec![1; self.strata]);
        if !self.costs.affords(&vec![1; self.strata]) {
            return Err(Error::BudgetInfeasible {
                budget: self.costs.budget,
                minimum,
            });
        }
        Ok(())
    }
}

/// Allocations of one scheme for both strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAllocation {
    pub scheme: AllocationScheme,
    pub strata: AllocationPlan,
    pub frames: AllocationPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRunResult {
    pub estimator: Estimator,
    pub scheme: AllocationScheme,
    pub true_mean: f64,
    pub estimates: Vec<f64>,
    pub mse: f64,
    pub relative_bias: f64,
    /// 5th and 95th percentiles of the estimates.
    pub p5: f64,
    pub p95: f64,
    /// Bootstrap 5th and 95th percentiles of the MSE.
    pub mse_p5: f64,
    pub mse_p95: f64,
    /// Mean of the first `r + 1` estimates.
    pub running_mean: Vec<f64>,
    /// False when fewer than two replications were run.
    pub reliable: bool,
}

impl EstimatorRunResult {
    pub fn replications(&self) -> usize {
        self.estimates.len()
    }

    /// `(estimate - mu) / mu` per replication.
    pub fn relative_errors(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| (e - self.true_mean) / self.true_mean).collect()
    }

    pub fn mean_estimate(&self) -> f64 {
        stats::mean(&self.estimates)
    }

    /// Monte Carlo standard error of the mean estimate.
    pub fn standard_error(&self) -> f64 {
        stats::std_dev(&self.estimates) / math::sqrt(self.estimates.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub true_mean: f64,
    pub strata_sizes: Vec<usize>,
    pub frame_sizes: Vec<usize>,
    pub allocations: Vec<SchemeAllocation>,
    pub results: Vec<EstimatorRunResult>,
    pub warnings: Vec<String>,
}

impl SimulationReport {
    pub fn result(&self, scheme: AllocationScheme, estimator: Estimator) -> Option<&EstimatorRunResult> {
        self.results.iter().find(|r| r.scheme == scheme && r.estimator == estimator)
    }
}

/// Strata, frames and allocations fixed for a whole run.
#[derive(Debug, Clone)]
pub struct SimulationSetup {
    pub strata: Strata,
    pub frames: Frames,
    pub allocations: Vec<SchemeAllocation>,
    pub warnings: Vec<String>,
}

/// Within-stratum population standard deviations of `y`.
pub fn stratum_sigmas(y: &[f64], strata: &Strata) -> Vec<f64> {
    (0..strata.count())
        .map(|h| {
            let v: Vec<f64> = strata.members(h).iter().map(|&u| y[u]).collect();
            stats::population_std_dev(&v)
        })
        .collect()
}

/// Within-frame population standard deviations of `y / m`.
pub fn frame_sigmas(y: &[f64], frames: &Frames) -> Vec<f64> {
    (0..frames.frames)
        .map(|f| {
            let v: Vec<f64> = frames
                .members(f)
                .iter()
                .map(|&u| y[u] / frames.multiplicity(u) as f64)
                .collect();
            stats::population_std_dev(&v)
        })
        .collect()
}

pub fn setup(scenario: &Scenario, pop: &Population) -> Result<SimulationSetup> {
    if pop.len() != scenario.population.size {
        return Err(Error::LengthMismatch { left: pop.len(), right: scenario.population.size });
    }
    let strata = stratify(&pop.x, scenario.strata)?;
    let frames = build_frames(&pop.x, &scenario.layout, derive_seed(scenario.seed, &[u64::MAX - 1]))?;
    let mut allocations = Vec::new();
    let mut warnings = Vec::new();
    for scheme in AllocationScheme::ALL {
        let (s, f) = match scheme {
            AllocationScheme::Proportional => (
                allocation::proportional(&strata.sizes, scenario.sample_size)?,
                allocation::proportional(&frames.sizes, scenario.sample_size)?,
            ),
            AllocationScheme::OptimalCost => (
                allocation::optimal_cost(&strata.sizes, &stratum_sigmas(&pop.y, &strata), &scenario.costs)?,
                allocation::optimal_cost(&frames.sizes, &frame_sigmas(&pop.y, &frames), &scenario.costs)?,
            ),
        };
        for (what, plan) in [("strata", &s), ("frames", &f)] {
            if let Some(w) = &plan.warning {
                warnings.push(format!("{} allocation over {what}: {w}", scheme.as_str()));
            }
        }
        allocations.push(SchemeAllocation { scheme, strata: s, frames: f });
    }
    if strata.degenerate {
        warnings.push(String::from("tied design values at a stratum cut; ties split by unit index"));
    }
    Ok(SimulationSetup {
        strata,
        frames,
        allocations,
        warnings,
    })
}

struct Replicate {
    sts: f64,
    sm: f64,
    pml: f64,
    dropped: bool,
}

struct Prepared<'a> {
    pop: &'a Population,
    stratum_members: Vec<Vec<usize>>,
    frame_members: Vec<Vec<usize>>,
    frames: &'a Frames,
    strata_sizes: &'a [usize],
    designs: Vec<SampfordDesign>,
    domains: Vec<u32>,
}

impl Prepared<'_> {
    fn replicate(&self, plan: &SchemeAllocation, sts_seed: u64, mf_seed: u64) -> Result<Replicate> {
        let mut rng = rng::seeded(sts_seed);
        let mut strata = Vec::with_capacity(self.stratum_members.len());
        for (h, members) in self.stratum_members.iter().enumerate() {
            let picked = srs_draw(members.len(), plan.strata.sizes[h], &mut rng)?;
            strata.push(StratumSample {
                population: self.strata_sizes[h],
                values: picked.iter().map(|&i| self.pop.y[members[i]]).collect(),
            });
        }
        let sts = estimators::estimate_sts(&strata)?;

        let mut rng = rng::seeded(mf_seed);
        let mut samples = Vec::with_capacity(self.designs.len());
        for (members, design) in self.frame_members.iter().zip(&self.designs) {
            let pi = design.inclusion_probabilities();
            let picked = design.draw(&mut rng)?;
            samples.push(FrameSample {
                population: members.len(),
                units: picked
                    .iter()
                    .map(|&i| SampledUnit {
                        y: self.pop.y[members[i]],
                        pi: pi[i],
                        mask: self.frames.masks[members[i]],
                    })
                    .collect(),
            });
        }
        let sm = estimators::estimate_sm(&samples, self.pop.len())?;
        let pml = estimators::estimate_pml(&samples, &self.domains)?;
        Ok(Replicate {
            sts,
            sm,
            pml: pml.mean,
            dropped: !pml.dropped.is_empty(),
        })
    }
}

pub fn run_monte_carlo(scenario: &Scenario) -> Result<SimulationReport> {
    scenario.validate()?;
    let pop = generate_population(&scenario.population)?;
    run_on_population(scenario, &pop)
}

/// Runs the scenario on a given population (its size must match the
/// scenario's population size).
pub fn run_on_population(scenario: &Scenario, pop: &Population) -> Result<SimulationReport> {
    scenario.validate()?;
    let SimulationSetup {
        strata,
        frames,
        allocations,
        mut warnings,
    } = setup(scenario, pop)?;
    let true_mean = pop.mean_y();
    let frame_members: Vec<Vec<usize>> = (0..frames.frames).map(|f| frames.members(f)).collect();
    let mut results = Vec::new();

    for (a, plan) in allocations.iter().enumerate() {
        let designs = frame_members
            .iter()
            .zip(&plan.frames.sizes)
            .map(|(members, &n)| match scenario.size_measure {
                SizeMeasure::Uniform => SampfordDesign::uniform(members.len(), n),
                SizeMeasure::DesignVariable => {
                    SampfordDesign::new(&members.iter().map(|&u| pop.x[u]).collect::<Vec<_>>(), n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let prepared = Prepared {
            pop,
            stratum_members: (0..strata.count()).map(|h| strata.members(h)).collect(),
            frame_members: frame_members.clone(),
            frames: &frames,
            strata_sizes: &strata.sizes,
            designs,
            domains: frames.domain_masks(),
        };
        let reps = map_indexed(scenario.replications, |r| {
            let r = r as u64;
            let a = a as u64;
            prepared.replicate(
                plan,
                derive_seed(scenario.seed, &[r, a, 0]),
                derive_seed(scenario.seed, &[r, a, 1]),
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let dropped = reps.iter().filter(|r| r.dropped).count();
        if dropped > 0 {
            warnings.push(format!(
                "{}: {dropped} replications had a domain without sampled units",
                plan.scheme.as_str()
            ));
        }
        for (e, estimator) in Estimator::ALL.into_iter().enumerate() {
            let estimates: Vec<f64> = reps
                .iter()
                .map(|r| match estimator {
                    Estimator::Sts => r.sts,
                    Estimator::Sm => r.sm,
                    Estimator::Pml => r.pml,
                })
                .collect();
            let seed = derive_seed(scenario.seed, &[u64::MAX, a as u64, e as u64]);
            results.push(summarize(estimator, plan.scheme, estimates, true_mean, scenario.bootstrap, seed));
        }
    }
    if scenario.replications < 2 {
        warnings.push(String::from("fewer than two replications; Monte Carlo metrics are unreliable"));
    }
    Ok(SimulationReport {
        true_mean,
        strata_sizes: strata.sizes.clone(),
        frame_sizes: frames.sizes.clone(),
        allocations,
        results,
        warnings,
    })
}

/// MSE, relative bias, percentiles, bootstrap MSE band and running mean.
pub fn summarize(
    estimator: Estimator,
    scheme: AllocationScheme,
    estimates: Vec<f64>,
    true_mean: f64,
    bootstrap: usize,
    seed: u64,
) -> EstimatorRunResult {
    let m = estimates.len();
    let squared: Vec<f64> = estimates.iter().map(|e| (e - true_mean) * (e - true_mean)).collect();
    let mse = stats::mean(&squared);
    let relative_bias = compensated_sum(estimates.iter().map(|e| (e - true_mean) / true_mean)) / m as f64;
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    let (mse_p5, mse_p95) = if bootstrap == 0 {
        (mse, mse)
    } else {
        let mut rng = rng::seeded(seed);
        let mut means: Vec<f64> = (0..bootstrap)
            .map(|_| compensated_sum((0..m).map(|_| squared[rng.random_range(0..m)])) / m as f64)
            .collect();
        means.sort_by(f64::total_cmp);
        (
            stats::percentile_sorted(&means, 0.05),
            stats::percentile_sorted(&means, 0.95),
        )
    };
    let mut running_mean = Vec::with_capacity(m);
    let mut acc = 0.0;
    for (i, e) in estimates.iter().enumerate() {
        acc += e;
        running_mean.push(acc / (i + 1) as f64);
    }
    EstimatorRunResult {
        estimator,
        scheme,
        true_mean,
        p5: stats::percentile_sorted(&sorted, 0.05),
        p95: stats::percentile_sorted(&sorted, 0.95),
        estimates,
        mse,
        relative_bias,
        mse_p5,
        mse_p95,
        running_mean,
        reliable: m >= 2,
    }
}
