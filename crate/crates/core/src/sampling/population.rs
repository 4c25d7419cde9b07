//! Synthetic bivariate Gaussian population, truncated to positive values.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math;
use crate::rng;
use crate::stats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationConfig {
    pub size: usize,
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            size: 3000,
            mu_x: 4.0,
            mu_y: 1.0,
            sigma_x: 0.3,
            sigma_y: 0.2,
            rho: 0.85,
            seed: 0,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidConfig("population size must be at least 1".into()));
        }
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0) || !self.sigma_x.is_finite() || !self.sigma_y.is_finite() {
            return Err(Error::InvalidConfig("standard deviations must be positive".into()));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("correlation {} outside (-1, 1)", self.rho)));
        }
        if !self.mu_x.is_finite() || !self.mu_y.is_finite() {
            return Err(Error::InvalidConfig("means must be finite".into()));
        }
        Ok(())
    }
}

/// Design variable `x` and study variable `y` for every unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Population {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
        }
        if x.is_empty() {
            return Err(Error::TooFewItems { needed: 1, got: 0 });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("population values must be finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn mean_y(&self) -> f64 {
        stats::mean(&self.y)
    }
}

/// Draws `size` pairs, redrawing any pair with a non-positive coordinate.
pub fn generate_population(cfg: &PopulationConfig) -> Result<Population> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let tail = math::sqrt(1.0 - cfg.rho * cfg.rho);
    let mut x = Vec::with_capacity(cfg.size);
    let mut y = Vec::with_capacity(cfg.size);
    while x.len() < cfg.size {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let xv = cfg.mu_x + cfg.sigma_x * z1;
        let yv = cfg.mu_y + cfg.sigma_y * (cfg.rho * z1 + tail * z2);
        if xv > 0.0 && yv > 0.0 {
            x.push(xv);
            y.push(yv);
        }
    }
    Ok(Population { x, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_unit_population() {
        let p = generate_population(&PopulationConfig { size: 1, ..Default::default() }).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.x[0] > 0.0 && p.y[0] > 0.0);
    }

    #[test]
    fn truncation_rejects_non_positive_draws() {
        let cfg = PopulationConfig {
            size: 2000,
            mu_x: 0.1,
            mu_y: 0.0,
            sigma_x: 1.0,
            sigma_y: 1.0,
            rho: 0.3,
            seed: 4,
        };
        let p = generate_population(&cfg).unwrap();
        assert!(p.x.iter().chain(&p.y).all(|v| *v > 0.0));
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = PopulationConfig::default();
        assert!(generate_population(&PopulationConfig { rho: 1.0, ..base }).is_err());
        assert!(generate_population(&PopulationConfig { sigma_y: 0.0, ..base }).is_err());
        assert!(generate_population(&PopulationConfig { size: 0, ..base }).is_err());
    }

    #[test]
    fn same_seed_same_population() {
        let cfg = PopulationConfig { size: 50, seed: 9, ..Default::default() };
        assert_eq!(generate_population(&cfg).unwrap(), generate_population(&cfg).unwrap());
    }
}
