//! Simple random sampling without replacement.

use alloc::vec::Vec;

use rand::Rng;

use crate::rng;
use crate::{Error, Result};

/// Draws `n` distinct positions out of `0..population`, ascending.
pub fn srs_draw<R: Rng + ?Sized>(population: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if n > population {
        return Err(Error::OversizedSample { requested: n, available: population });
    }
    let mut picked = rand::seq::index::sample(rng, population, n).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Samples `n` members of `units`; every member has inclusion probability
/// `n / units.len()`.
pub fn srs_sample(units: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = rng::seeded(seed);
    Ok(srs_draw(units.len(), n, &mut rng)?.into_iter().map(|i| units[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_take_returns_everything() {
        let units = [4, 8, 15, 16, 23, 42];
        assert_eq!(srs_sample(&units, 6, 1).unwrap(), units.to_vec());
    }

    #[test]
    fn invalid_sizes() {
        assert_eq!(srs_sample(&[1, 2], 0, 1), Err(Error::EmptySample));
        assert!(matches!(srs_sample(&[1, 2], 3, 1), Err(Error::OversizedSample { .. })));
    }

    #[test]
    fn distinct_members() {
        let units: Vec<usize> = (100..200).collect();
        let s = srs_sample(&units, 30, 5).unwrap();
        assert_eq!(s.len(), 30);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(s.iter().all(|u| (100..200).contains(u)));
    }
}
