//! TOML scenario files for `simulate`.
//!
//! ```toml
//! seed = 0
//! replications = 2500
//! bootstrap = 1000            # optional
//!
//! [population]
//! size = 3000
//! mu_x = 4.0
//! mu_y = 1.0
//! sigma_x = 0.3
//! sigma_y = 0.2
//! rho = 0.85
//! seed = 0
//!
//! [design]
//! strata = 3
//! sample_size = 600
//! size_measure = "uniform"    # or "x"; optional
//! assignment = "sorted"       # or "random"; optional
//! domain_sizes = [985, 10, 975, 10, 1020]
//!
//! [costs]
//! fixed = 0.0                 # optional
//! unit = [9.5, 10.0, 10.5]
//! budget = 6000.0
//! ```
//!
//! `domain_sizes` lays frames out as a chain `{1}, {1,2}, {2}, ..., {Q}`.
//! Any other overlap pattern is written as a list of domains instead, each
//! naming its frames (1-based):
//!
//! ```toml
//! [[design.domains]]
//! frames = [1, 3]
//! size = 40
//! ```
//!
//! Optional top-level `schemes` and `estimators` lists restrict which rows
//! the reports contain.

use std::path::Path;

use serde::{Deserialize, Serialize};
use surveykit_core::sampling::{
    AllocationScheme, CostModel, DomainAssignment, DomainSpec, Estimator, FrameLayout, PopulationConfig, Scenario,
    SizeMeasure,
};
use surveykit_core::sampling::monte_carlo::DEFAULT_BOOTSTRAP;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    pub replications: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<String>>,
    pub population: PopulationSection,
    pub design: DesignSection,
    pub costs: CostSection,
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSection {
    pub size: usize,
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub strata: usize,
    pub sample_size: usize,
    #[serde(default = "default_size_measure")]
    pub size_measure: String,
    #[serde(default = "default_assignment")]
    pub assignment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<Vec<DomainEntry>>,
}

fn default_size_measure() -> String {
    SizeMeasure::Uniform.as_str().into()
}

fn default_assignment() -> String {
    DomainAssignment::SortedByDesign.as_str().into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainEntry {
    pub frames: Vec<usize>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default)]
    pub fixed: f64,
    pub unit: Vec<f64>,
    pub budget: f64,
}

/// A validated scenario plus the report filters.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub schemes: Vec<AllocationScheme>,
    pub estimators: Vec<Estimator>,
}

fn invalid(msg: String) -> AppError {
    AppError::Scenario(msg)
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        let chain = FrameLayout::chain(&s.layout.domains.iter().map(|d| d.size).collect::<Vec<_>>())
            .ok()
            .filter(|c| c.domains == s.layout.domains);
        let (domain_sizes, domains) = match chain {
            Some(_) => (Some(s.layout.domains.iter().map(|d| d.size).collect()), None),
            None => (
                None,
                Some(
                    s.layout
                        .domains
                        .iter()
                        .map(|d| DomainEntry {
                            frames: (0..s.layout.frames).filter(|f| d.mask >> f & 1 == 1).map(|f| f + 1).collect(),
                            size: d.size,
                        })
                        .collect(),
                ),
            ),
        };
        Self {
            seed: s.seed,
            replications: s.replications,
            bootstrap: s.bootstrap,
            schemes: None,
            estimators: None,
            population: PopulationSection {
                size: s.population.size,
                mu_x: s.population.mu_x,
                mu_y: s.population.mu_y,
                sigma_x: s.population.sigma_x,
                sigma_y: s.population.sigma_y,
                rho: s.population.rho,
                seed: s.population.seed,
            },
            design: DesignSection {
                strata: s.strata,
                sample_size: s.sample_size,
                size_measure: s.size_measure.as_str().into(),
                assignment: s.layout.assignment.as_str().into(),
                domain_sizes,
                domains,
            },
            costs: CostSection {
                fixed: s.costs.fixed,
                unit: s.costs.unit.clone(),
                budget: s.costs.budget,
            },
        }
    }

    pub fn into_scenario(self) -> AppResult<LoadedScenario> {
        let d = &self.design;
        let mut layout = match (&d.domain_sizes, &d.domains) {
            (Some(sizes), None) => FrameLayout::chain(sizes)?,
            (None, Some(domains)) => {
                let frames = domains.iter().flat_map(|e| e.frames.iter().copied()).max().unwrap_or(0);
                let mut specs = Vec::with_capacity(domains.len());
                for e in domains {
                    let mut mask = 0u32;
                    for &f in &e.frames {
                        if f == 0 || f > 31 {
                            return Err(invalid(format!("frame number {f} out of range (frames are 1-based)")));
                        }
                        mask |= 1 << (f - 1);
                    }
                    specs.push(DomainSpec { mask, size: e.size });
                }
                FrameLayout {
                    frames,
                    domains: specs,
                    assignment: DomainAssignment::SortedByDesign,
                }
            }
            (None, None) => return Err(invalid("design needs `domain_sizes` or `domains`".into())),
            (Some(_), Some(_)) => return Err(invalid("design takes only one of `domain_sizes` and `domains`".into())),
        };
        layout.assignment = DomainAssignment::parse(&d.assignment)
            .ok_or_else(|| invalid(format!("unknown assignment {:?} (expected \"sorted\" or \"random\")", d.assignment)))?;
        let size_measure = SizeMeasure::parse(&d.size_measure)
            .ok_or_else(|| invalid(format!("unknown size_measure {:?} (expected \"uniform\" or \"x\")", d.size_measure)))?;
        let schemes = match &self.schemes {
            None => AllocationScheme::ALL.to_vec(),
            Some(list) => list
                .iter()
                .map(|s| AllocationScheme::parse(s).ok_or_else(|| invalid(format!("unknown scheme {s:?}"))))
                .collect::<AppResult<_>>()?,
        };
        let estimators = match &self.estimators {
            None => Estimator::ALL.to_vec(),
            Some(list) => list
                .iter()
                .map(|s| Estimator::parse(s).ok_or_else(|| invalid(format!("unknown estimator {s:?}"))))
                .collect::<AppResult<_>>()?,
        };
        let scenario = Scenario {
            population: PopulationConfig {
                size: self.population.size,
                mu_x: self.population.mu_x,
                mu_y: self.population.mu_y,
                sigma_x: self.population.sigma_x,
                sigma_y: self.population.sigma_y,
                rho: self.population.rho,
                seed: self.population.seed,
            },
            strata: d.strata,
            layout,
            sample_size: d.sample_size,
            costs: CostModel {
                fixed: self.costs.fixed,
                unit: self.costs.unit,
                budget: self.costs.budget,
            },
            size_measure,
            replications: self.replications,
            bootstrap: self.bootstrap,
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(LoadedScenario {
            scenario,
            schemes,
            estimators,
        })
    }
}

pub fn parse_scenario(text: &str) -> AppResult<LoadedScenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| invalid(e.message().to_string()))?;
    file.into_scenario()
}

pub fn read_scenario(path: &Path) -> AppResult<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_scenario(&text)
}

pub fn format_scenario(s: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_round_trips() {
        let s = Scenario::default();
        let text = format_scenario(&s);
        let loaded = parse_scenario(&text).unwrap();
        assert_eq!(loaded.scenario, s);
        assert_eq!(loaded.schemes, AllocationScheme::ALL.to_vec());
    }

    #[test]
    fn missing_field_is_named() {
        let text = format_scenario(&Scenario::default()).replace("replications = 2500\n", "");
        let e = parse_scenario(&text).unwrap_err();
        assert_eq!(e.kind(), "scenario_schema");
        assert!(e.to_string().contains("replications"), "{e}");
    }

    #[test]
    fn explicit_domains() {
        let mut s = Scenario::default();
        s.layout = FrameLayout {
            frames: 3,
            domains: vec![
                DomainSpec { mask: 0b001, size: 990 },
                DomainSpec { mask: 0b101, size: 10 },
                DomainSpec { mask: 0b010, size: 1000 },
                DomainSpec { mask: 0b100, size: 1000 },
            ],
            assignment: DomainAssignment::Random,
        };
        let text = format_scenario(&s);
        assert!(text.contains("[[design.domains]]"));
        assert_eq!(parse_scenario(&text).unwrap().scenario, s);
    }

    #[test]
    fn unknown_values_are_rejected() {
        let base = format_scenario(&Scenario::default());
        assert!(parse_scenario(&base.replace("\"uniform\"", "\"pps\"")).is_err());
        assert!(parse_scenario(&format!("estimators = [\"HT\"]\n{base}")).is_err());
        assert!(parse_scenario(&format!("colour = 1\n{base}")).is_err());
        let e = parse_scenario(&base.replace("budget = 6000.0", "budget = 10.0")).unwrap_err();
        assert_eq!(e.kind(), "budget_infeasible");
    }
}
