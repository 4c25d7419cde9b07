//! Sample allocation across strata or frames.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationScheme {
    Proportional,
    OptimalCost,
}

impl AllocationScheme {
    pub const ALL: [AllocationScheme; 2] = [Self::Proportional, Self::OptimalCost];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Proportional => "proportional",
            Self::OptimalCost => "optimal_cost",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "proportional" => Some(Self::Proportional),
            "optimal_cost" => Some(Self::OptimalCost),
            _ => None,
        }
    }
}

/// Linear survey cost `C = c0 + sum n_q c_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub fixed: f64,
    pub unit: Vec<f64>,
    pub budget: f64,
}

impl CostModel {
    pub fn cost(&self, sizes: &[usize]) -> f64 {
        self.fixed + sizes.iter().zip(&self.unit).map(|(n, c)| *n as f64 * c).sum::<f64>()
    }

    /// Budget check with a relative slack of `1e-12` for rounding.
    pub fn affords(&self, sizes: &[usize]) -> bool {
        self.cost(sizes) <= self.budget + 1e-12 * math::abs(self.budget)
    }

    fn validate(&self, groups: usize) -> Result<()> {
        if self.unit.len() != groups {
            return Err(Error::LengthMismatch { left: self.unit.len(), right: groups });
        }
        if self.unit.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidConfig("unit costs must be positive".into()));
        }
        if !(self.fixed >= 0.0) || !self.budget.is_finite() {
            return Err(Error::InvalidConfig("fixed cost must be non-negative and budget finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    pub scheme: AllocationScheme,
    pub sizes: Vec<usize>,
    /// Unrounded targets.
    pub targets: Vec<f64>,
    /// Set when the optimal scheme fell back to proportional targets.
    pub warning: Option<String>,
}

impl AllocationPlan {
    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// `n_q = n N_q / sum N_q`, rounded by largest remainder so that the sizes
/// add up to `n`, each within `[1, N_q]`.
pub fn proportional(pop_sizes: &[usize], n: usize) -> Result<AllocationPlan> {
    check_sizes(pop_sizes)?;
    let total: usize = pop_sizes.iter().sum();
    if n > total {
        return Err(Error::OversizedSample { requested: n, available: total });
    }
    if n < pop_sizes.len() {
        return Err(Error::InvalidConfig(format!(
            "sample size {n} cannot give every one of {} groups a unit",
            pop_sizes.len()
        )));
    }
    let targets: Vec<f64> = pop_sizes.iter().map(|&s| n as f64 * s as f64 / total as f64).collect();
    let sizes = largest_remainder(&targets, n, pop_sizes);
    Ok(AllocationPlan {
        scheme: AllocationScheme::Proportional,
        sizes,
        targets,
        warning: None,
    })
}

/// Cost-optimal allocation
/// `n_q = (C - c0) N_q sigma_q / sqrt(c_q) / sum_r N_r sigma_r sqrt(c_r)`.
///
/// Targets are floored, clamped to `[1, N_q]`, then topped up by largest
/// remainder (and afterwards cheapest group first) while the budget allows.
/// All-zero `sigmas` fall back to proportional targets under the budget.
pub fn optimal_cost(pop_sizes: &[usize], sigmas: &[f64], costs: &CostModel) -> Result<AllocationPlan> {
    check_sizes(pop_sizes)?;
    costs.validate(pop_sizes.len())?;
    if sigmas.len() != pop_sizes.len() {
        return Err(Error::LengthMismatch { left: sigmas.len(), right: pop_sizes.len() });
    }
    if sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidConfig("standard deviations must be finite and non-negative".into()));
    }
    let minimum = costs.fixed + costs.unit.iter().sum::<f64>();
    if minimum > costs.budget {
        return Err(Error::BudgetInfeasible { budget: costs.budget, minimum });
    }
    let spend = costs.budget - costs.fixed;
    let (weights, warning): (Vec<f64>, _) = if sigmas.iter().all(|s| *s == 0.0) {
        (
            pop_sizes.iter().map(|&s| s as f64).collect(),
            Some(String::from("all standard deviations are zero; using proportional allocation under the budget")),
        )
    } else {
        (pop_sizes.iter().zip(sigmas).map(|(&s, sd)| s as f64 * sd).collect(), None)
    };
    // With equal-sigma weights this reduces to spend * N_q / sum N_r c_r.
    let denom: f64 = weights.iter().zip(&costs.unit).map(|(w, c)| w * math::sqrt(*c)).sum();
    let targets: Vec<f64> = weights
        .iter()
        .zip(&costs.unit)
        .map(|(w, c)| spend * w / math::sqrt(*c) / denom)
        .collect();
    let sizes = round_under_budget(&targets, pop_sizes, costs);
    Ok(AllocationPlan {
        scheme: AllocationScheme::OptimalCost,
        sizes,
        targets,
        warning,
    })
}

fn check_sizes(pop_sizes: &[usize]) -> Result<()> {
    if pop_sizes.is_empty() {
        return Err(Error::InvalidConfig("no groups to allocate".into()));
    }
    if pop_sizes.contains(&0) {
        return Err(Error::InvalidConfig("every group needs at least one unit".into()));
    }
    Ok(())
}

/// Indices by descending fractional part, ties to the lower index.
/// Remainders are compared on a `1e-9` grid so that equal shares computed
/// along different formulas tie.
fn remainder_order(targets: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    let frac = |i: usize| math::round((targets[i] - math::floor(targets[i])) * 1e9) as u64;
    order.sort_by(|&a, &b| frac(b).cmp(&frac(a)).then(a.cmp(&b)));
    order
}

fn largest_remainder(targets: &[f64], n: usize, caps: &[usize]) -> Vec<usize> {
    let mut sizes: Vec<usize> = targets
        .iter()
        .zip(caps)
        .map(|(t, &cap)| (math::floor(*t) as usize).clamp(1, cap))
        .collect();
    let order = remainder_order(targets);
    let mut assigned: usize = sizes.iter().sum();
    // Top up by remainder; further passes only matter after clamping.
    while assigned < n {
        for &i in &order {
            if assigned < n && sizes[i] < caps[i] {
                sizes[i] += 1;
                assigned += 1;
            }
        }
    }
    while assigned > n {
        for &i in order.iter().rev() {
            if assigned > n && sizes[i] > 1 {
                sizes[i] -= 1;
                assigned -= 1;
            }
        }
    }
    sizes
}

fn round_under_budget(targets: &[f64], caps: &[usize], costs: &CostModel) -> Vec<usize> {
    let mut sizes: Vec<usize> = targets
        .iter()
        .zip(caps)
        .map(|(t, &cap)| (math::floor(*t) as usize).clamp(1, cap))
        .collect();
    // Clamping up to one unit can overshoot; shed from the largest groups.
    while !costs.affords(&sizes) {
        let i = (0..sizes.len()).filter(|&i| sizes[i] > 1).max_by_key(|&i| sizes[i]);
        match i {
            Some(i) => sizes[i] -= 1,
            None => break,
        }
    }
    let fits = |sizes: &mut Vec<usize>, i: usize| {
        sizes[i] += 1;
        let ok = sizes[i] <= caps[i] && costs.affords(sizes);
        sizes[i] -= 1;
        ok
    };
    for i in remainder_order(targets) {
        if fits(&mut sizes, i) {
            sizes[i] += 1;
        }
    }
    let mut cheapest: Vec<usize> = (0..sizes.len()).collect();
    cheapest.sort_by(|&a, &b| costs.unit[a].total_cmp(&costs.unit[b]).then(a.cmp(&b)));
    while let Some(&i) = cheapest.iter().find(|&&i| fits(&mut sizes, i)) {
        sizes[i] += 1;
    }
    sizes
}
