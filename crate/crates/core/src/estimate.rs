//! Robustness curves, exact intervals, margins, and the donut-combined
//! estimator.

use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::engine::RunOutput;

/// One grid point of a robustness curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    /// Radius (or scale) label of the set this point belongs to.
    pub radius: f64,
    /// Passing samples.
    pub successes: u64,
    /// Delivered samples.
    pub trials: u64,
    /// `successes / trials`.
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Estimated probability of the requirement holding, per chain set, with
/// exact binomial confidence intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCurve {
    /// Points ordered by radius, smallest set first.
    pub points: Vec<CurvePoint>,
    /// Two-sided confidence level of every interval, e.g. `0.99`.
    pub confidence: f64,
}

/// How a margin query reads the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginBasis {
    /// Compare `1 - epsilon` against the point estimates.
    PointEstimate,
    /// Compare against the interval lower bounds; conservative.
    CiLowerBound,
}

/// Result of a margin query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Margin {
    /// Largest grid radius whose curve value still reaches `1 - epsilon`.
    AtRadius(f64),
    /// Even the smallest set misses the target.
    BelowGrid,
}

/// Estimation failures.
#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("successes {successes} exceed trials {trials}")]
    MoreSuccessesThanTrials { successes: u64, trials: u64 },
    #[error("need at least one trial")]
    ZeroTrials,
    #[error("confidence must lie strictly between 0 and 1, got {0}")]
    BadConfidence(f64),
    #[error("curve has no points")]
    EmptyCurve,
    #[error("{labels} radius labels for {sets} sets")]
    LabelMismatch { labels: usize, sets: usize },
    #[error("radius labels must be strictly increasing (violated at index {0})")]
    NonIncreasingRadii(usize),
    #[error("epsilon must lie in [0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("radius {radius} is below the curve's smallest grid point {smallest}")]
    RadiusBelowGrid { radius: f64, smallest: f64 },
    #[error("volumes are inconsistent: outer {outer} != donut {donut} + inner {inner}")]
    VolumeIdentity { outer: f64, donut: f64, inner: f64 },
    #[error("volume must be positive and finite, got {0}")]
    BadVolume(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("donut volume fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
}

/// Exact (Clopper–Pearson) two-sided binomial confidence interval for the
/// success probability after `successes` out of `trials`. The interval is
/// closed at 0 when `successes == 0` and at 1 when `successes == trials`.
pub fn binomial_ci(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64), EstimateError> {
    if trials == 0 {
        return Err(EstimateError::ZeroTrials);
    }
    if successes > trials {
        return Err(EstimateError::MoreSuccessesThanTrials { successes, trials });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(EstimateError::BadConfidence(confidence));
    }
    let alpha = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((lo, hi))
}

/// Builds a curve from per-set `(successes, trials)` counts and radius
/// labels (strictly increasing, one per set).
pub fn curve_from_counts(
    counts: &[(u64, u64)],
    radii: &[f64],
    confidence: f64,
) -> Result<RobustnessCurve, EstimateError> {
    if counts.is_empty() {
        return Err(EstimateError::EmptyCurve);
    }
    if radii.len() != counts.len() {
        return Err(EstimateError::LabelMismatch {
            labels: radii.len(),
            sets: counts.len(),
        });
    }
    if let Some(i) = (1..radii.len()).find(|&i| radii[i] <= radii[i - 1]) {
        return Err(EstimateError::NonIncreasingRadii(i));
    }
    let points = counts
        .iter()
        .zip(radii)
        .map(|(&(successes, trials), &radius)| {
            let (ci_lo, ci_hi) = binomial_ci(successes, trials, confidence)?;
            Ok(CurvePoint {
                radius,
                successes,
                trials,
                estimate: successes as f64 / trials as f64,
                ci_lo,
                ci_hi,
            })
        })
        .collect::<Result<Vec<_>, EstimateError>>()?;
    Ok(RobustnessCurve { points, confidence })
}

/// Builds the robustness curve of a finished run: per-set success counts
/// over the delivered samples, with exact intervals.
pub fn estimate_curve(
    output: &RunOutput,
    radii: &[f64],
    confidence: f64,
) -> Result<RobustnessCurve, EstimateError> {
    let counts: Vec<(u64, u64)> = (0..output.sets())
        .map(|i| {
            (
                output.success_count(i),
                output.delivered_indices(i).len() as u64,
            )
        })
        .collect();
    curve_from_counts(&counts, radii, confidence)
}

/// Largest radius on the curve's grid at which the estimated probability
/// still reaches `1 - epsilon`, using the point estimates.
pub fn margin(curve: &RobustnessCurve, epsilon: f64) -> Result<Margin, EstimateError> {
    margin_with(curve, epsilon, MarginBasis::PointEstimate)
}

/// [`margin`] with an explicit reading of the curve; the
/// [`MarginBasis::CiLowerBound`] variant only certifies a radius when the
/// whole confidence interval sits above the target.
pub fn margin_with(
    curve: &RobustnessCurve,
    epsilon: f64,
    basis: MarginBasis,
) -> Result<Margin, EstimateError> {
    if curve.points.is_empty() {
        return Err(EstimateError::EmptyCurve);
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(EstimateError::BadEpsilon(epsilon));
    }
    let target = 1.0 - epsilon;
    let best = curve
        .points
        .iter()
        .filter(|p| {
            let value = match basis {
                MarginBasis::PointEstimate => p.estimate,
                MarginBasis::CiLowerBound => p.ci_lo,
            };
            value >= target
        })
        .map(|p| p.radius)
        .fold(f64::NEG_INFINITY, f64::max);
    if best.is_finite() {
        Ok(Margin::AtRadius(best))
    } else {
        Ok(Margin::BelowGrid)
    }
}

/// Smallest estimated probability among grid points with radius at most
/// `radius`. Errors when `radius` undercuts the whole grid.
pub fn curve_infimum(curve: &RobustnessCurve, radius: f64) -> Result<f64, EstimateError> {
    if curve.points.is_empty() {
        return Err(EstimateError::EmptyCurve);
    }
    let smallest = curve.points[0].radius;
    if radius < smallest {
        return Err(EstimateError::RadiusBelowGrid { radius, smallest });
    }
    Ok(curve
        .points
        .iter()
        .filter(|p| p.radius <= radius)
        .map(|p| p.estimate)
        .fold(f64::INFINITY, f64::min))
}

/// Reassembles the success probability over a full ball from the estimate
/// over its donut, when the requirement is known to hold on the hole:
/// `(estimate * vol_donut + vol_hole) / vol_outer`. The three volumes must
/// satisfy `vol_outer = vol_donut + vol_hole` to within `1e-9` relative.
pub fn donut_reconstruct(
    donut_estimate: f64,
    vol_donut: f64,
    vol_hole: f64,
    vol_outer: f64,
) -> Result<f64, EstimateError> {
    for v in [vol_donut, vol_hole, vol_outer] {
        if !(v.is_finite() && v > 0.0) {
            return Err(EstimateError::BadVolume(v));
        }
    }
    if (vol_outer - vol_donut - vol_hole).abs() > 1e-9 * vol_outer {
        return Err(EstimateError::VolumeIdentity {
            outer: vol_outer,
            donut: vol_donut,
            inner: vol_hole,
        });
    }
    if !(0.0..=1.0).contains(&donut_estimate) {
        return Err(EstimateError::BadProbability(donut_estimate));
    }
    Ok((donut_estimate * vol_donut + vol_hole) / vol_outer)
}

/// A donut-based estimate of a full-ball probability, carrying the pieces
/// the reconstruction used.
#[derive(Debug, Clone, PartialEq)]
pub struct DonutEstimate {
    /// Estimated success probability on the donut alone.
    pub donut_estimate: f64,
    /// `vol_donut / vol_outer`, the fraction of the ball the donut covers.
    pub donut_fraction: f64,
    /// Reconstructed success probability over the full ball.
    pub reconstructed: f64,
}

impl DonutEstimate {
    pub fn new(
        donut_estimate: f64,
        vol_donut: f64,
        vol_hole: f64,
        vol_outer: f64,
    ) -> Result<Self, EstimateError> {
        let reconstructed = donut_reconstruct(donut_estimate, vol_donut, vol_hole, vol_outer)?;
        Ok(Self {
            donut_estimate,
            donut_fraction: vol_donut / vol_outer,
            reconstructed,
        })
    }
}

/// Variance of the donut-reconstructed estimator relative to estimating
/// directly on the full ball with the same number of samples, given the
/// true donut success probability `p` and donut volume fraction
/// `lambda` in `(0, 1)`. Always below 1: the donut route never loses.
pub fn variance_ratio(p: f64, lambda: f64) -> Result<f64, EstimateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EstimateError::BadProbability(p));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(EstimateError::BadFraction(lambda));
    }
    Ok(p * lambda / (1.0 - (1.0 - p) * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(values: &[(f64, u64, u64)]) -> RobustnessCurve {
        let counts: Vec<(u64, u64)> = values.iter().map(|&(_, k, n)| (k, n)).collect();
        let radii: Vec<f64> = values.iter().map(|&(r, _, _)| r).collect();
        curve_from_counts(&counts, &radii, 0.99).unwrap()
    }

    #[test]
    fn binomial_ci_edges_close_at_the_boundary() {
        let (lo, hi) = binomial_ci(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.30850).abs() < 5e-5);

        let (lo, hi) = binomial_ci(10, 10, 0.95).unwrap();
        assert!((lo - 0.69150).abs() < 5e-5);
        assert_eq!(hi, 1.0);

        let (lo, hi) = binomial_ci(5, 10, 0.95).unwrap();
        assert!((lo - 0.18709).abs() < 5e-5);
        assert!((hi - 0.81291).abs() < 5e-5);
    }

    #[test]
    fn binomial_ci_rejects_bad_inputs() {
        assert!(matches!(
            binomial_ci(3, 0, 0.95),
            Err(EstimateError::ZeroTrials)
        ));
        assert!(matches!(
            binomial_ci(11, 10, 0.95),
            Err(EstimateError::MoreSuccessesThanTrials { .. })
        ));
        assert!(matches!(
            binomial_ci(5, 10, 1.0),
            Err(EstimateError::BadConfidence(_))
        ));
        assert!(matches!(
            binomial_ci(5, 10, 0.0),
            Err(EstimateError::BadConfidence(_))
        ));
    }

    #[test]
    fn interval_tightens_with_more_trials() {
        let (lo1, hi1) = binomial_ci(50, 100, 0.99).unwrap();
        let (lo2, hi2) = binomial_ci(500, 1000, 0.99).unwrap();
        assert!(hi2 - lo2 < hi1 - lo1);
        assert!(lo2 > lo1 && hi2 < hi1);
    }

    #[test]
    fn margin_finds_the_largest_qualifying_radius() {
        let c = curve(&[
            (1.0, 100, 100),
            (2.0, 99, 100),
            (3.0, 90, 100),
            (4.0, 50, 100),
        ]);
        assert_eq!(margin(&c, 0.05).unwrap(), Margin::AtRadius(2.0));
        assert_eq!(margin(&c, 0.15).unwrap(), Margin::AtRadius(3.0));
        assert_eq!(margin(&c, 0.0).unwrap(), Margin::AtRadius(1.0));
    }

    #[test]
    fn margin_below_grid_when_nothing_qualifies() {
        let c = curve(&[(1.0, 10, 100), (2.0, 5, 100)]);
        assert_eq!(margin(&c, 0.05).unwrap(), Margin::BelowGrid);
    }

    #[test]
    fn margin_ci_basis_is_more_conservative() {
        let c = curve(&[(1.0, 200, 200), (2.0, 195, 200)]);
        assert_eq!(margin(&c, 0.05).unwrap(), Margin::AtRadius(2.0));
        // 195/200 clears 0.95 as a point estimate but its 99% lower bound
        // doesn't, while 200/200's lower bound 0.005^(1/200) ~ 0.974 does.
        assert_eq!(
            margin_with(&c, 0.05, MarginBasis::CiLowerBound).unwrap(),
            Margin::AtRadius(1.0)
        );
    }

    #[test]
    fn margin_validates_epsilon() {
        let c = curve(&[(1.0, 10, 10)]);
        assert!(matches!(
            margin(&c, 1.0),
            Err(EstimateError::BadEpsilon(_))
        ));
        assert!(matches!(
            margin(&c, -0.1),
            Err(EstimateError::BadEpsilon(_))
        ));
    }

    #[test]
    fn curve_infimum_scans_only_up_to_the_radius() {
        let c = curve(&[(1.0, 95, 100), (2.0, 80, 100), (3.0, 99, 100)]);
        assert_eq!(curve_infimum(&c, 1.0).unwrap(), 0.95);
        assert_eq!(curve_infimum(&c, 2.5).unwrap(), 0.80);
        assert_eq!(curve_infimum(&c, 3.0).unwrap(), 0.80);
        assert!(matches!(
            curve_infimum(&c, 0.5),
            Err(EstimateError::RadiusBelowGrid { .. })
        ));
    }

    #[test]
    fn curve_labels_must_match_and_increase() {
        assert!(matches!(
            curve_from_counts(&[(1, 2), (1, 2)], &[1.0], 0.99),
            Err(EstimateError::LabelMismatch { labels: 1, sets: 2 })
        ));
        assert!(matches!(
            curve_from_counts(&[(1, 2), (1, 2)], &[1.0, 1.0], 0.99),
            Err(EstimateError::NonIncreasingRadii(1))
        ));
    }

    #[test]
    fn donut_reconstruction_matches_hand_computation() {
        // Ball of volume 4, hole of volume 1, donut of volume 3.
        let got = donut_reconstruct(0.5, 3.0, 1.0, 4.0).unwrap();
        assert!((got - (0.5 * 3.0 + 1.0) / 4.0).abs() < 1e-15);

        // Estimate 0 still leaves the hole's guaranteed mass.
        assert!((donut_reconstruct(0.0, 3.0, 1.0, 4.0).unwrap() - 0.25).abs() < 1e-15);
        // Estimate 1 recovers certainty.
        assert!((donut_reconstruct(1.0, 3.0, 1.0, 4.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn donut_reconstruction_rejects_inconsistent_volumes() {
        assert!(matches!(
            donut_reconstruct(0.5, 3.0, 1.0, 4.1),
            Err(EstimateError::VolumeIdentity { .. })
        ));
        assert!(matches!(
            donut_reconstruct(0.5, 3.0, -1.0, 2.0),
            Err(EstimateError::BadVolume(_))
        ));
        assert!(matches!(
            donut_reconstruct(1.5, 3.0, 1.0, 4.0),
            Err(EstimateError::BadProbability(_))
        ));
    }

    #[test]
    fn donut_estimate_carries_fraction_and_reconstruction() {
        let e = DonutEstimate::new(0.5, 3.0, 1.0, 4.0).unwrap();
        assert!((e.donut_fraction - 0.75).abs() < 1e-15);
        assert!((e.reconstructed - 0.625).abs() < 1e-15);
    }

    #[test]
    fn variance_ratio_stays_below_one() {
        // p = 5/12, lambda = 3/4 gives 5/9.
        let got = variance_ratio(5.0 / 12.0, 0.75).unwrap();
        assert!((got - 5.0 / 9.0).abs() < 1e-15);

        for p in [0.01, 0.3, 0.7, 0.99] {
            for lambda in [0.1, 0.5, 0.9] {
                assert!(variance_ratio(p, lambda).unwrap() < 1.0);
            }
        }
        assert!(matches!(
            variance_ratio(0.5, 1.0),
            Err(EstimateError::BadFraction(_))
        ));
        assert!(matches!(
            variance_ratio(-0.1, 0.5),
            Err(EstimateError::BadProbability(_))
        ));
    }
}
