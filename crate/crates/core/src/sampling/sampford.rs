//! Rao-Sampford fixed-size sampling with prescribed inclusion probabilities.
//!
//! Target probabilities are `pi_k = n s_k / sum s` for a size measure `s`;
//! units reaching `pi_k >= 1` are taken with certainty and the rest
//! renormalized until every remaining `pi_k < 1`.
//!
//! The Sampford design gives sample `s` probability proportional to
//! `sum_{k in s} (1 - pi_k) * prod_{k in s} r_k` with `r_k = pi_k / (1 - pi_k)`.
//! [`SampfordDesign::draw`] samples the conditional Poisson design
//! `prod r_k` exactly (list-sequential, log-space elementary symmetric
//! polynomials) and accepts with probability proportional to
//! `sum (1 - pi_k)`, which yields the same design with a high acceptance
//! rate. [`SampfordDesign::draw_classic`] is the textbook rejective
//! procedure: one draw with probabilities `pi_k / n`, `n - 1` draws with
//! replacement proportional to `r_k`, accepted only if all distinct.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::math;
use crate::rng;
use crate::{Error, Result};

pub const RETRY_CAP: usize = 1_000_000;

/// Inclusion probabilities `n s_k / sum s` with certainty units peeled off.
pub fn inclusion_probabilities(sizes: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if n > sizes.len() {
        return Err(Error::OversizedSample { requested: n, available: sizes.len() });
    }
    if let Some(i) = sizes.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidSizeMeasure(format!("size {} at position {i} is not positive", sizes[i])));
    }
    let mut pi = vec![0.0; sizes.len()];
    let mut certain = vec![false; sizes.len()];
    let mut left = n;
    loop {
        let open = certain.iter().filter(|c| !**c).count();
        if left == open {
            certain.iter_mut().for_each(|c| *c = true);
            break;
        }
        let total: f64 = sizes.iter().zip(&certain).filter(|(_, c)| !**c).map(|(s, _)| s).sum();
        let mut peeled = false;
        for k in 0..sizes.len() {
            if !certain[k] && left as f64 * sizes[k] / total >= 1.0 {
                certain[k] = true;
                left -= 1;
                peeled = true;
            }
        }
        if !peeled {
            for k in 0..sizes.len() {
                if !certain[k] {
                    pi[k] = left as f64 * sizes[k] / total;
                }
            }
            break;
        }
        if left == 0 {
            break;
        }
    }
    for (p, c) in pi.iter_mut().zip(&certain) {
        if *c {
            *p = 1.0;
        }
    }
    Ok(pi)
}

/// Precomputed Sampford design over positions `0..N`.
#[derive(Debug, Clone)]
pub struct SampfordDesign {
    pi: Vec<f64>,
    certain: Vec<usize>,
    rest: Vec<usize>,
    n_rest: usize,
    log_r: Vec<f64>,
    /// `(rest.len() + 1) x (n_rest + 1)`: log of the elementary symmetric
    /// polynomial of degree `j` over the odds of `rest[i..]`.
    table: Vec<f64>,
    accept_bound: f64,
}

impl SampfordDesign {
    pub fn new(sizes: &[f64], n: usize) -> Result<Self> {
        let pi = inclusion_probabilities(sizes, n)?;
        let certain: Vec<usize> = (0..pi.len()).filter(|&k| pi[k] >= 1.0).collect();
        let rest: Vec<usize> = (0..pi.len()).filter(|&k| pi[k] < 1.0).collect();
        let n_rest = n - certain.len();
        let log_r: Vec<f64> = rest.iter().map(|&k| math::ln(pi[k]) - math::ln_1p(-pi[k])).collect();

        let m = rest.len();
        let w = n_rest + 1;
        let mut table = vec![f64::NEG_INFINITY; (m + 1) * w];
        table[m * w] = 0.0;
        for i in (0..m).rev() {
            table[i * w] = 0.0;
            for j in 1..w {
                table[i * w + j] = math::log_add_exp(table[(i + 1) * w + j], log_r[i] + table[(i + 1) * w + j - 1]);
            }
        }

        let mut complements: Vec<f64> = rest.iter().map(|&k| 1.0 - pi[k]).collect();
        complements.sort_by(|a, b| b.total_cmp(a));
        let accept_bound = complements.iter().take(n_rest).sum();
        Ok(Self {
            pi,
            certain,
            rest,
            n_rest,
            log_r,
            table,
            accept_bound,
        })
    }

    /// Equal size measures: `pi = n / N` for every unit.
    pub fn uniform(population: usize, n: usize) -> Result<Self> {
        Self::new(&vec![1.0; population], n)
    }

    pub fn inclusion_probabilities(&self) -> &[f64] {
        &self.pi
    }

    pub fn sample_size(&self) -> usize {
        self.certain.len() + self.n_rest
    }

    pub fn population(&self) -> usize {
        self.pi.len()
    }

    /// One sample of positions, ascending.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        if self.n_rest == 0 {
            return Ok(self.certain.clone());
        }
        let w = self.n_rest + 1;
        let mut chosen = Vec::with_capacity(self.n_rest);
        for _ in 0..RETRY_CAP {
            chosen.clear();
            let mut j = self.n_rest;
            for i in 0..self.rest.len() {
                if j == 0 {
                    break;
                }
                let p = math::exp(self.log_r[i] + self.table[(i + 1) * w + j - 1] - self.table[i * w + j]);
                if rng.random::<f64>() < p {
                    chosen.push(i);
                    j -= 1;
                }
            }
            let mass: f64 = chosen.iter().map(|&i| 1.0 - self.pi[self.rest[i]]).sum();
            if rng.random::<f64>() * self.accept_bound < mass {
                return Ok(self.merge(&chosen));
            }
        }
        Err(Error::RetryExhausted(RETRY_CAP))
    }

    /// Classical rejective Sampford draw; slow when `n` is large.
    pub fn draw_classic<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        if self.n_rest == 0 {
            return Ok(self.certain.clone());
        }
        let first = WeightedIndex::new(self.rest.iter().map(|&k| self.pi[k]))
            .map_err(|e| Error::InvalidSizeMeasure(format!("{e}")))?;
        let others = WeightedIndex::new(self.log_r.iter().map(|l| math::exp(*l)))
            .map_err(|e| Error::InvalidSizeMeasure(format!("{e}")))?;
        let mut chosen = Vec::with_capacity(self.n_rest);
        for _ in 0..RETRY_CAP {
            chosen.clear();
            chosen.push(first.sample(rng));
            let mut distinct = true;
            while distinct && chosen.len() < self.n_rest {
                let i = others.sample(rng);
                if chosen.contains(&i) {
                    distinct = false;
                } else {
                    chosen.push(i);
                }
            }
            if distinct {
                chosen.sort_unstable();
                return Ok(self.merge(&chosen));
            }
        }
        Err(Error::RetryExhausted(RETRY_CAP))
    }

    fn merge(&self, chosen: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self.certain.iter().copied().chain(chosen.iter().map(|&i| self.rest[i])).collect();
        out.sort_unstable();
        out
    }
}

/// A drawn sample with the inclusion probability of every member.
#[derive(Debug, Clone, PartialEq)]
pub struct SampfordSample {
    pub units: Vec<usize>,
    pub pi: Vec<f64>,
}

/// Draws `n` members of `units` with probabilities proportional to `sizes`.
pub fn sampford_sample(units: &[usize], sizes: &[f64], n: usize, seed: u64) -> Result<SampfordSample> {
    if units.len() != sizes.len() {
        return Err(Error::LengthMismatch { left: units.len(), right: sizes.len() });
    }
    let design = SampfordDesign::new(sizes, n)?;
    let positions = design.draw(&mut rng::seeded(seed))?;
    Ok(SampfordSample {
        pi: positions.iter().map(|&p| design.pi[p]).collect(),
        units: positions.into_iter().map(|p| units[p]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_sizes_give_srs_probabilities() {
        let pi = inclusion_probabilities(&[2.0; 10], 4).unwrap();
        assert!(pi.iter().all(|p| (*p - 0.4).abs() < 1e-15));
    }

    #[test]
    fn certainty_units_are_peeled() {
        let pi = inclusion_probabilities(&[100.0, 1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(pi[0], 1.0);
        assert!(pi[1..].iter().all(|p| (*p - 0.25).abs() < 1e-15));
        let d = SampfordDesign::new(&[100.0, 1.0, 1.0, 1.0, 1.0], 2).unwrap();
        let mut rng = rng::seeded(3);
        for _ in 0..100 {
            let s = d.draw(&mut rng).unwrap();
            assert_eq!(s.len(), 2);
            assert_eq!(s[0], 0);
        }
    }

    #[test]
    fn peeling_cascades() {
        let pi = inclusion_probabilities(&[50.0, 20.0, 1.0, 1.0, 1.0, 1.0], 3).unwrap();
        assert_eq!(&pi[..2], &[1.0, 1.0]);
        assert!((pi[2..].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn census_takes_everyone() {
        let d = SampfordDesign::new(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(d.draw(&mut rng::seeded(1)).unwrap(), vec![0, 1, 2]);
        assert!(d.inclusion_probabilities().iter().all(|p| *p == 1.0));
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(SampfordDesign::new(&[1.0, -1.0], 1), Err(Error::InvalidSizeMeasure(_))));
        assert!(matches!(SampfordDesign::new(&[1.0, 1.0], 3), Err(Error::OversizedSample { .. })));
        assert_eq!(SampfordDesign::new(&[1.0, 1.0], 0).unwrap_err(), Error::EmptySample);
    }

    #[test]
    fn draws_have_fixed_size_and_distinct_units() {
        let sizes: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let d = SampfordDesign::new(&sizes, 12).unwrap();
        let mut rng = rng::seeded(8);
        for _ in 0..200 {
            let s = d.draw(&mut rng).unwrap();
            assert_eq!(s.len(), 12);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            let c = d.draw_classic(&mut rng).unwrap();
            assert_eq!(c.len(), 12);
            assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
