//! Small statistical helpers shared by tests, the audit path, and the CLI.

/// One-sample Kolmogorov–Smirnov statistic against `U(0, 1)`.
#[must_use]
pub fn ks_statistic_uniform(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, x) in sorted.iter().enumerate() {
        let above = (i + 1) as f64 / n - x;
        let below = x - i as f64 / n;
        d = d.max(above).max(below);
    }
    d
}

/// Asymptotic critical value for the one-sample KS test: reject uniformity
/// at level `alpha` when the statistic exceeds this. Good for `n` in the
/// dozens and beyond; tiny samples deserve exact tables instead.
#[must_use]
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

/// Sample mean and standard error of the mean (`n - 1` in the variance
/// denominator). Returns `(mean, 0.0)` for a single value.
#[must_use]
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance (`n - 1` denominator).
#[must_use]
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_statistic_on_perfect_grid_is_half_spacing() {
        // Points at (i - 0.5)/n give the minimal possible statistic 1/(2n).
        let n = 100;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic_uniform(&grid);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_statistic_flags_constant_sample() {
        let d = ks_statistic_uniform(&vec![0.5; 50]);
        assert!(d >= 0.5 - 1e-12);
        assert!(d > ks_critical_value(0.01, 50));
    }

    #[test]
    fn ks_critical_value_matches_published_one_percent_constant() {
        // sqrt(-ln(0.005)/2) = 1.6276 to four decimals.
        let c = ks_critical_value(0.01, 1);
        assert!((c - 1.6276).abs() < 5e-4);
        assert!((ks_critical_value(0.01, 10_000) - c / 100.0).abs() < 1e-12);
    }

    #[test]
    fn mean_stderr_matches_hand_computation() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-12);
        // Variance 5/3, stderr sqrt(5/12).
        assert!((se - (5.0_f64 / 12.0).sqrt()).abs() < 1e-12);

        let (m, se) = mean_stderr(&[7.0]);
        assert_eq!((m, se), (7.0, 0.0));
    }

    #[test]
    fn variance_of_constants_is_zero() {
        assert_eq!(sample_variance(&[3.0, 3.0, 3.0]), 0.0);
    }
}
