//! Estimators of the population mean of `y`.
//!
//! - STS: stratified mean `sum_h (N_h / N) ybar_h` under SRS within strata.
//! - SM: simple multiplicity estimator `sum_q sum_{k in s_q} y_k / (m_k pi_kq) / N`.
//! - PML: multi-frame pseudo-maximum-likelihood estimator. Domain sizes
//!   `N_d` maximize `sum_q theta_q sum_{d in q} Nhat_qd ln(N_d / N_q)` subject
//!   to `sum_{d in q} N_d = N_q`, with `theta_q = n_q / N_q` and `Nhat_qd` the
//!   frame-`q` Horvitz-Thompson count of domain `d`. Writing
//!   `c_d = sum_q theta_q Nhat_qd`, the solution is `N_d = c_d / sum_{q in d}
//!   lambda_q` where `lambda` minimizes the convex dual
//!   `g(lambda) = sum_q lambda_q N_q - sum_d c_d ln(sum_{q in d} lambda_q)`,
//!   solved by damped Newton. Domain means pool the frame samples with the
//!   same `theta_q` weights; the estimate is `sum_d N_d ybar_d / sum_d N_d`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg;
use crate::math;
use crate::stats::compensated_sum;
use crate::{Error, Result};

pub const PML_TOLERANCE: f64 = 1e-10;
pub const PML_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Sts,
    Sm,
    Pml,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Self::Pml, Self::Sm, Self::Sts];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sts => "STS",
            Self::Sm => "SM",
            Self::Pml => "PML",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "STS" => Some(Self::Sts),
            "SM" => Some(Self::Sm),
            "PML" => Some(Self::Pml),
            _ => None,
        }
    }
}

/// SRS sample from one stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSample {
    pub population: usize,
    pub values: Vec<f64>,
}

/// One sampled unit of a frame sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledUnit {
    pub y: f64,
    /// Inclusion probability in the frame it was drawn from.
    pub pi: f64,
    /// Full frame-membership mask; multiplicity is its bit count.
    pub mask: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub population: usize,
    pub units: Vec<SampledUnit>,
}

pub fn estimate_sts(strata: &[StratumSample]) -> Result<f64> {
    if strata.is_empty() {
        return Err(Error::InvalidConfig("no strata".into()));
    }
    let n_pop: usize = strata.iter().map(|s| s.population).sum();
    let mut parts = Vec::with_capacity(strata.len());
    for (h, s) in strata.iter().enumerate() {
        if s.values.is_empty() {
            return Err(Error::EmptyStratumSample(h));
        }
        let mean = compensated_sum(s.values.iter().copied()) / s.values.len() as f64;
        parts.push(s.population as f64 / n_pop as f64 * mean);
    }
    Ok(compensated_sum(parts))
}

fn check_units(frames: &[FrameSample]) -> Result<()> {
    for (q, f) in frames.iter().enumerate() {
        for u in &f.units {
            if !(u.pi > 0.0) {
                return Err(Error::ZeroInclusionProbability);
            }
            if u.mask >> q & 1 == 0 {
                return Err(Error::InvalidConfig(format!(
                    "unit with mask {:#b} sampled from frame {q} it does not belong to",
                    u.mask
                )));
            }
        }
    }
    Ok(())
}

/// Simple multiplicity estimate of the mean over `n_pop` units.
pub fn estimate_sm(frames: &[FrameSample], n_pop: usize) -> Result<f64> {
    check_units(frames)?;
    let total = compensated_sum(
        frames
            .iter()
            .flat_map(|f| f.units.iter())
            .map(|u| u.y / (u.mask.count_ones() as f64 * u.pi)),
    );
    Ok(total / n_pop as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmlEstimate {
    pub mean: f64,
    /// Domain masks with a positive estimated size, ascending.
    pub domains: Vec<u32>,
    pub domain_sizes: Vec<f64>,
    /// Domains of `expected` with no sampled unit; their mass went to the
    /// remaining domains of the same frames.
    pub dropped: Vec<u32>,
    pub iterations: usize,
}

/// Pseudo-maximum-likelihood domain sizes from pooled counts `c_d`.
///
/// Returns the sizes and the Newton iteration count.
pub fn pml_domain_sizes(frame_sizes: &[f64], masks: &[u32], counts: &[f64]) -> Result<(Vec<f64>, usize)> {
    let q = frame_sizes.len();
    if masks.len() != counts.len() {
        return Err(Error::LengthMismatch { left: masks.len(), right: counts.len() });
    }
    let members = |d: usize| (0..q).filter(move |&f| masks[d] >> f & 1 == 1);
    for f in 0..q {
        if !(0..masks.len()).any(|d| masks[d] >> f & 1 == 1 && counts[d] > 0.0) {
            return Err(Error::InvalidConfig(format!("frame {f} has no sampled domain")));
        }
    }
    let dual = |lambda: &[f64]| -> Option<f64> {
        let mut g: f64 = lambda.iter().zip(frame_sizes).map(|(l, n)| l * n).sum();
        for d in 0..masks.len() {
            if counts[d] > 0.0 {
                let s: f64 = members(d).map(|f| lambda[f]).sum();
                if !(s > 0.0) {
                    return None;
                }
                g -= counts[d] * math::ln(s);
            }
        }
        Some(g)
    };

    // Exact when the counts come from a census.
    let mut lambda: Vec<f64> = (0..q)
        .map(|f| {
            let c: f64 = (0..masks.len())
                .filter(|&d| masks[d] >> f & 1 == 1)
                .map(|d| counts[d] / masks[d].count_ones() as f64)
                .sum();
            c / frame_sizes[f]
        })
        .collect();
    let mut value = dual(&lambda).ok_or(Error::NonConvergence { iterations: 0 })?;
    let scale: f64 = frame_sizes.iter().copied().fold(0.0, f64::max);

    for iteration in 0..=PML_MAX_ITERATIONS {
        let mut grad: Vec<f64> = frame_sizes.to_vec();
        let mut hess = vec![0.0; q * q];
        for d in 0..masks.len() {
            if counts[d] <= 0.0 {
                continue;
            }
            let s: f64 = members(d).map(|f| lambda[f]).sum();
            for a in members(d) {
                grad[a] -= counts[d] / s;
                for b in members(d) {
                    hess[a * q + b] += counts[d] / (s * s);
                }
            }
        }
        if grad.iter().all(|g| math::abs(*g) <= PML_TOLERANCE * scale) {
            let sizes = (0..masks.len())
                .map(|d| {
                    if counts[d] > 0.0 {
                        counts[d] / members(d).map(|f| lambda[f]).sum::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect();
            return Ok((sizes, iteration));
        }
        if iteration == PML_MAX_ITERATIONS {
            break;
        }
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let step = linalg::solve(&hess, &neg).or_else(|| {
            let ridge = 1e-12 * (0..q).map(|i| hess[i * q + i]).sum::<f64>();
            let mut h = hess.clone();
            (0..q).for_each(|i| h[i * q + i] += ridge);
            linalg::solve(&h, &neg)
        });
        let step = step.ok_or(Error::NonConvergence { iterations: iteration })?;
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = lambda.iter().zip(&step).map(|(l, s)| l + t * s).collect();
            if let Some(v) = dual(&trial) {
                // The slack absorbs rounding once the dual is flat.
                if v <= value + 1e-4 * t * slope + 1e-12 * math::abs(value) {
                    lambda = trial;
                    value = v;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-30 {
                return Err(Error::NonConvergence { iterations: iteration });
            }
        }
    }
    Err(Error::NonConvergence { iterations: PML_MAX_ITERATIONS })
}

/// PML estimate of the mean. `expected` lists the domain masks of the frame
/// layout; absent ones are reported as dropped.
pub fn estimate_pml(frames: &[FrameSample], expected: &[u32]) -> Result<PmlEstimate> {
    check_units(frames)?;
    let mut masks: Vec<u32> = frames.iter().flat_map(|f| f.units.iter().map(|u| u.mask)).collect();
    masks.sort_unstable();
    masks.dedup();
    let mut counts = vec![0.0; masks.len()];
    let mut totals = vec![0.0; masks.len()];
    for f in frames {
        if f.units.is_empty() {
            continue;
        }
        let theta = f.units.len() as f64 / f.population as f64;
        for u in &f.units {
            let d = masks.binary_search(&u.mask).expect("mask collected above");
            counts[d] += theta / u.pi;
            totals[d] += theta * u.y / u.pi;
        }
    }
    let frame_sizes: Vec<f64> = frames.iter().map(|f| f.population as f64).collect();
    let (sizes, iterations) = pml_domain_sizes(&frame_sizes, &masks, &counts)?;
    let mean = compensated_sum((0..masks.len()).map(|d| sizes[d] * totals[d] / counts[d]))
        / compensated_sum(sizes.iter().copied());
    let dropped = expected.iter().copied().filter(|m| masks.binary_search(m).is_err()).collect();
    Ok(PmlEstimate {
        mean,
        domains: masks,
        domain_sizes: sizes,
        dropped,
        iterations,
    })
}
