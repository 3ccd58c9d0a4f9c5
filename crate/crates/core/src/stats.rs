//! Small descriptive-statistics helpers and critical values.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Arithmetic mean. Returns `NaN` for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the `n - 1` denominator, `None` for `n < 2`.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (n - 1) as f64).sqrt())
}

/// Two-tailed critical value of Student's t with `df` degrees of freedom,
/// i.e. the `1 - alpha/2` quantile.
///
/// # Panics
///
/// Panics if `df == 0` or `alpha` is outside `(0, 1)`.
pub fn t_critical(df: u64, alpha: f64) -> f64 {
    assert!(df >= 1, "t_critical needs at least one degree of freedom");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid Student's t parameters");
    dist.inverse_cdf(1.0 - alpha / 2.0)
}

/// Two-tailed standard normal critical value, 1.959964 at `alpha = 0.05`.
pub fn z_critical(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}
