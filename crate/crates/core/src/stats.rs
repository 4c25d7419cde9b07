//! Small summary-statistics helpers shared by validation and simulation.

use alloc::vec::Vec;

use crate::math;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if math::abs(sum) >= math::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss = compensated_sum(values.iter().map(|v| (v - m) * (v - m)));
    math::sqrt(ss / (values.len() - 1) as f64)
}

/// Population standard deviation (n denominator).
pub fn population_std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    let ss = compensated_sum(values.iter().map(|v| (v - m) * (v - m)));
    math::sqrt(ss / values.len() as f64)
}

/// Linear-interpolation percentile (Hyndman-Fan type 7), `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, q)
}

pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = math::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean with a normal-approximation 95% interval of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanInterval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

pub fn mean_interval(values: &[f64]) -> MeanInterval {
    let m = mean(values);
    let half = if values.len() < 2 {
        0.0
    } else {
        Z_95 * std_dev(values) / math::sqrt(values.len() as f64)
    };
    MeanInterval {
        mean: m,
        low: m - half,
        high: m + half,
    }
}

/// Jackknife 95% interval for the mean of replicate values.
pub fn jackknife_mean_interval(values: &[f64]) -> MeanInterval {
    let r = values.len();
    let m = mean(values);
    if r < 2 {
        return MeanInterval {
            mean: m,
            low: m,
            high: m,
        };
    }
    let total = compensated_sum(values.iter().copied());
    let loo: Vec<f64> = values
        .iter()
        .map(|v| (total - v) / (r - 1) as f64)
        .collect();
    let loo_mean = mean(&loo);
    let ss = compensated_sum(loo.iter().map(|t| (t - loo_mean) * (t - loo_mean)));
    let se = math::sqrt((r - 1) as f64 / r as f64 * ss);
    MeanInterval {
        mean: m,
        low: m - Z_95 * se,
        high: m + Z_95 * se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 5.0);
        assert!((percentile(&v, 0.1) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn jackknife_of_mean_matches_standard_error() {
        let v = [0.1, 0.4, 0.35, 0.2, 0.05, 0.3];
        let jk = jackknife_mean_interval(&v);
        let se = std_dev(&v) / (v.len() as f64).sqrt();
        assert!((jk.high - jk.mean - Z_95 * se).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(v), 1.0);
    }
}
