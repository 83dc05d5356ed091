//! Sample statistics used by the diagnostics: Kolmogorov-Smirnov distance to
//! a centered normal, moments, and lag-one autocorrelation.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fewest samples accepted by [`ks_statistic`].
pub const KS_MIN_SAMPLES: usize = 100;

/// Standard normal CDF, `0.5 * erfc(-x / sqrt 2)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 - normal_cdf(x)`, accurate for large `x`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `sup_x |F_n(x) - Phi(x / sigma)|` over the empirical CDF `F_n` of
/// `samples`, evaluated at both sides of every jump.
pub fn ks_statistic<T: Real>(samples: &[T], sigma: T) -> Result<T> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "KS statistic needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("KS samples contain NaN"));
    }
    let sigma = sigma.as_f64();
    let mut sorted: Vec<f64> = samples.iter().map(|v| v.as_f64()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal_cdf(x / sigma);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(T::of(d.min(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments<T> {
    pub count: usize,
    pub mean: T,
    /// Unbiased sample variance.
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

/// Mean, variance, skewness and excess kurtosis. Central moments are the
/// plain (biased) sample moments; variance is the unbiased estimate.
pub fn moments<T: Real>(samples: &[T]) -> Result<Moments<T>> {
    let count = samples.len();
    if count < 2 {
        return Err(Error::invalid("moments need at least two samples"));
    }
    let n = count as f64;
    let mean = samples.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in samples {
        let d = v.as_f64() - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(Moments {
        count,
        mean: T::of(mean),
        variance: T::of(m2 * n / (n - 1.0)),
        skewness: T::of(skewness),
        excess_kurtosis: T::of(excess_kurtosis),
    })
}

/// Sample mean and its standard error.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Lag-one sample autocorrelation. Zero for constant input.
pub fn lag1_autocorrelation<T: Real>(samples: &[T]) -> T {
    if samples.len() < 2 {
        return T::zero();
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let c0: f64 = samples.iter().map(|v| (v.as_f64() - mean).powi(2)).sum();
    if c0 == 0.0 {
        return T::zero();
    }
    let c1: f64 = samples
        .windows(2)
        .map(|w| (w[0].as_f64() - mean) * (w[1].as_f64() - mean))
        .sum();
    T::of(c1 / c0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert!((normal_tail(1.0) - 0.158_655_253_931_457_05).abs() < 1e-14);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_435).abs() < 1e-14);
    }

    #[test]
    fn point_mass_at_zero() {
        let d = ks_statistic(&[0.0f64; 200], 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ks_statistic(&[0.0f64; 99], 1.0).is_err());
        assert!(ks_statistic(&[0.0f64; 100], 0.0).is_err());
        assert!(ks_statistic(&[0.0f64; 100], -1.0).is_err());
    }

    #[test]
    fn moments_of_two_point() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = moments(&x).unwrap();
        assert!(m.mean.abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-12);
        assert!((m.excess_kurtosis + 2.0).abs() < 1e-12);
        assert!((lag1_autocorrelation(&x) + 1.0).abs() < 1e-2);
    }
}
