use alloc::vec::Vec;

use crate::{Error, Result};

/// Typical/atypical split of a score vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierLabeling {
    /// `true` marks an atypical item.
    pub labels: Vec<bool>,
    pub low_centroid: f64,
    pub high_centroid: f64,
    /// Scores at or above this are atypical.
    pub boundary: f64,
}

impl OutlierLabeling {
    pub fn atypical_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn atypical_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| l.then_some(i))
            .collect()
    }

    /// Labels new scores against the fitted boundary.
    pub fn relabel(&self, scores: &[f64]) -> Vec<bool> {
        scores.iter().map(|&s| s >= self.boundary).collect()
    }
}

/// Exact two-cluster k-means on the real line.
///
/// The optimal clusters are contiguous in sorted order, so every split
/// between distinct consecutive values is tried and the one with the least
/// within-cluster sum of squares wins. Exact ties go to the lower split.
pub fn two_means_1d(scores: &[f64]) -> Result<OutlierLabeling> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::TooFewItems { needed: 2, got: n });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(i));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[n - 1] {
        return Err(Error::AllEqualScores);
    }

    // shift by the median to keep prefix sums well conditioned
    let shift = sorted[n / 2];
    let shifted: Vec<f64> = sorted.iter().map(|s| s - shift).collect();
    let mut s1 = Vec::with_capacity(n + 1);
    let mut s2 = Vec::with_capacity(n + 1);
    s1.push(0.0);
    s2.push(0.0);
    for &v in &shifted {
        s1.push(s1.last().unwrap() + v);
        s2.push(s2.last().unwrap() + v * v);
    }
    let sse = |a: usize, b: usize| {
        let m = (b - a) as f64;
        let t = s1[b] - s1[a];
        (s2[b] - s2[a] - t * t / m).max(0.0)
    };
    let scale = sse(0, n);
    let mut best: Option<(usize, f64)> = None;
    for cut in 1..n {
        if sorted[cut - 1] == sorted[cut] {
            continue;
        }
        let total = sse(0, cut) + sse(cut, n);
        match best {
            Some((_, b)) if total >= b - 1e-12 * scale => {}
            _ => best = Some((cut, total)),
        }
    }
    let (cut, _) = best.expect("at least two distinct values");
    let (lo, hi) = (sorted[cut - 1], sorted[cut]);
    let mut boundary = lo + (hi - lo) / 2.0;
    if boundary <= lo {
        boundary = hi;
    }
    let low_centroid = (s1[cut] / cut as f64) + shift;
    let high_centroid = ((s1[n] - s1[cut]) / (n - cut) as f64) + shift;
    Ok(OutlierLabeling {
        labels: scores.iter().map(|&s| s >= boundary).collect(),
        low_centroid,
        high_centroid,
        boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcc {
    pub value: f64,
    /// The confusion table had an empty row or column; `value` is 0.
    pub degenerate: bool,
}

/// Matthews correlation between two binary labelings.
pub fn mcc(a: &[bool], b: &[bool]) -> Result<Mcc> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        match (x, y) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return Ok(Mcc {
            value: 0.0,
            degenerate: true,
        });
    }
    let value = (tp * tn - fp * fn_) / crate::math::sqrt(denom);
    Ok(Mcc {
        value: value.clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// Share of positions where the labelings agree.
pub fn accuracy(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn small_examples() {
        let l = two_means_1d(&[0.1, 0.2, 0.9]).unwrap();
        assert_eq!(l.labels, vec![false, false, true]);
        assert!((l.boundary - 0.55).abs() < 1e-15);

        let l = two_means_1d(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(l.labels, vec![false, false, true, true]);
        assert_eq!((l.low_centroid, l.high_centroid), (0.0, 1.0));

        assert_eq!(two_means_1d(&[5.0, 5.0, 5.0]), Err(Error::AllEqualScores));
        assert_eq!(two_means_1d(&[1.0, f64::NAN]), Err(Error::NonFiniteScore(1)));
    }

    #[test]
    fn symmetric_tie_goes_to_the_lower_split() {
        let l = two_means_1d(&[2.0, 0.0, 1.0]).unwrap();
        assert_eq!(l.labels, vec![true, false, true]);
    }

    #[test]
    fn adjacent_floats_still_split() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let l = two_means_1d(&[a, b]).unwrap();
        assert_eq!(l.labels, vec![false, true]);
    }

    #[test]
    fn mcc_identities() {
        let a = [true, true, false, false];
        let not_a = [false, false, true, true];
        assert_eq!(mcc(&a, &a).unwrap().value, 1.0);
        assert_eq!(mcc(&a, &not_a).unwrap().value, -1.0);
        let m = mcc(&a, &[true, false, true, false]).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(!m.degenerate);
        let m = mcc(&[false; 3], &[false; 3]).unwrap();
        assert!(m.degenerate);
        assert_eq!(m.value, 0.0);
        assert!(mcc(&a, &a[..3]).is_err());
    }
}
