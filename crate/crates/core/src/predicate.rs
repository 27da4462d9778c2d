//! Requirement predicates evaluated on sampled points.
//!
//! A predicate maps a point to pass/fail. The built-ins cover the cases with
//! known closed-form success probabilities (so estimators can be checked
//! against truth) plus a cubic stability test; arbitrary requirements plug
//! in through [`Predicate::custom`].

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::chain::{PNorm, Shape, UncertaintySet};

/// Linear map from a sampled point to the three perturbations added to the
/// nominal cubic coefficients: row `k` dotted with the point perturbs
/// `nominal[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    pub rows: [Vec<f64>; 3],
}

impl CoefficientMap {
    fn dimension(&self) -> usize {
        self.rows[0].len()
    }
}

type CustomFn = dyn Fn(&[f64]) -> Result<bool, String> + Send + Sync;

/// A pass/fail requirement on points.
#[derive(Clone)]
pub enum Predicate {
    /// Passes inside the closed Euclidean ball of `radius` about the origin.
    InnerBall { radius: f64 },
    /// Passes where `normal · x <= offset`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// Passes where the monic cubic `s^3 + a2 s^2 + a1 s + a0`, with
    /// `[a2, a1, a0] = nominal + map · x`, has all roots strictly in the
    /// open left half plane.
    HurwitzCubic {
        nominal: [f64; 3],
        map: CoefficientMap,
    },
    /// User-supplied hook.
    Custom { name: String, eval: Arc<CustomFn> },
}

/// Evaluation failures.
#[derive(Debug, Error)]
pub enum PredicateError {
    #[error("dimension mismatch: predicate expects {expected}, point has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("predicate '{name}' failed: {message}")]
    EvaluationFailed { name: String, message: String },
}

impl Predicate {
    /// Wraps a closure as a predicate. The closure's `Err` string is
    /// surfaced as [`PredicateError::EvaluationFailed`].
    pub fn custom<F>(name: &str, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<bool, String> + Send + Sync + 'static,
    {
        Predicate::Custom {
            name: name.to_owned(),
            eval: Arc::new(eval),
        }
    }

    /// Evaluates the predicate at `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<bool, PredicateError> {
        match self {
            Predicate::InnerBall { radius } => Ok(PNorm::Two.eval(point) <= *radius),
            Predicate::Halfspace { normal, offset } => {
                if normal.len() != point.len() {
                    return Err(PredicateError::DimensionMismatch {
                        expected: normal.len(),
                        actual: point.len(),
                    });
                }
                let dot: f64 = normal.iter().zip(point).map(|(n, x)| n * x).sum();
                Ok(dot <= *offset)
            }
            Predicate::HurwitzCubic { nominal, map } => {
                if map.dimension() != point.len() {
                    return Err(PredicateError::DimensionMismatch {
                        expected: map.dimension(),
                        actual: point.len(),
                    });
                }
                let coeff = |k: usize| -> f64 {
                    nominal[k]
                        + map.rows[k]
                            .iter()
                            .zip(point)
                            .map(|(m, x)| m * x)
                            .sum::<f64>()
                };
                Ok(hurwitz_cubic_stable(coeff(0), coeff(1), coeff(2)))
            }
            Predicate::Custom { name, eval } => {
                eval(point).map_err(|message| PredicateError::EvaluationFailed {
                    name: name.clone(),
                    message,
                })
            }
        }
    }

    /// Exact success probability of the predicate under the uniform
    /// distribution on `set`, where a closed form exists:
    ///
    /// - inner ball of radius `r*` on a concentric Euclidean ball of radius
    ///   `r`: `min(1, (r*/r)^d)`;
    /// - inner ball on a concentric donut: the volume fraction of the shell
    ///   below `r*`;
    /// - halfspace whose boundary passes through a ball's center: `1/2`.
    ///
    /// `None` where no closed form is implemented.
    #[must_use]
    pub fn analytic_truth(&self, set: &UncertaintySet) -> Option<f64> {
        let d = set.dimension() as f64;
        match (self, set.shape()) {
            (Predicate::InnerBall { radius: r_star }, Shape::Ball { norm, radius }) => {
                if *norm != PNorm::Two || !is_origin(set.center()) {
                    return None;
                }
                Some((r_star / radius).powf(d).min(1.0))
            }
            (
                Predicate::InnerBall { radius: r_star },
                Shape::Donut {
                    hole_radius,
                    radius,
                },
            ) => {
                if !is_origin(set.center()) {
                    return None;
                }
                let fraction = (r_star.powf(d) - hole_radius.powf(d))
                    / (radius.powf(d) - hole_radius.powf(d));
                Some(fraction.clamp(0.0, 1.0))
            }
            (Predicate::Halfspace { normal, offset }, Shape::Ball { .. }) => {
                if normal.len() != set.dimension() {
                    return None;
                }
                let through_center: f64 = normal
                    .iter()
                    .zip(set.center())
                    .map(|(n, c)| n * c)
                    .sum::<f64>()
                    - offset;
                let scale = PNorm::Two.eval(normal).max(1.0);
                (through_center.abs() <= 1e-12 * scale).then_some(0.5)
            }
            _ => None,
        }
    }

    /// Wraps `self` so every evaluation bumps the returned counter. Used to
    /// verify that schedules evaluate the predicate exactly once per fresh
    /// sample.
    #[must_use]
    pub fn counting(self) -> (Predicate, Arc<AtomicU64>) {
        let counter = Arc::new(AtomicU64::new(0));
        let seen = Arc::clone(&counter);
        let name = format!("counting({self})");
        let wrapped = Predicate::custom(&name, move |point| {
            seen.fetch_add(1, Ordering::Relaxed);
            self.evaluate(point).map_err(|e| e.to_string())
        });
        (wrapped, counter)
    }
}

fn is_origin(center: &[f64]) -> bool {
    center.iter().all(|c| *c == 0.0)
}

/// Routh–Hurwitz test for `s^3 + a2 s^2 + a1 s + a0`: all roots strictly in
/// the open left half plane iff `a2, a1, a0 > 0` and `a2 a1 > a0`. Boundary
/// cases count as unstable.
#[must_use]
pub fn hurwitz_cubic_stable(a2: f64, a1: f64, a0: f64) -> bool {
    a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::InnerBall { radius } => write!(f, "inner_ball(r={radius})"),
            Predicate::Halfspace { .. } => write!(f, "halfspace"),
            Predicate::HurwitzCubic { .. } => write!(f, "hurwitz_cubic"),
            Predicate::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::UncertaintySet;

    #[test]
    fn inner_ball_accepts_boundary() {
        let p = Predicate::InnerBall { radius: 1.0 };
        assert!(p.evaluate(&[1.0, 0.0]).unwrap());
        assert!(p.evaluate(&[0.6, 0.8]).unwrap());
        assert!(!p.evaluate(&[0.8, 0.8]).unwrap());
    }

    #[test]
    fn halfspace_checks_dimensions() {
        let p = Predicate::Halfspace {
            normal: vec![1.0, -1.0],
            offset: 0.5,
        };
        assert!(p.evaluate(&[0.0, 0.0]).unwrap());
        assert!(p.evaluate(&[1.0, 0.5]).unwrap());
        assert!(!p.evaluate(&[1.0, 0.0]).unwrap());
        assert!(matches!(
            p.evaluate(&[1.0]),
            Err(PredicateError::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn hurwitz_conditions_match_known_cubics() {
        // (s+1)^3 = s^3 + 3s^2 + 3s + 1: stable.
        assert!(hurwitz_cubic_stable(3.0, 3.0, 1.0));
        // s^3 + s^2 + s + 1 has roots at -1 and ±i: boundary, unstable.
        assert!(!hurwitz_cubic_stable(1.0, 1.0, 1.0));
        // Sign failures.
        assert!(!hurwitz_cubic_stable(-1.0, 1.0, 1.0));
        assert!(!hurwitz_cubic_stable(1.0, -1.0, 1.0));
        assert!(!hurwitz_cubic_stable(1.0, 1.0, -1.0));
        // a2*a1 < a0 pushes a conjugate pair across the axis.
        assert!(!hurwitz_cubic_stable(1.0, 2.0, 3.0));
    }

    #[test]
    fn analytic_truth_inner_ball_on_ball() {
        let p = Predicate::InnerBall { radius: 1.0 };
        let set = UncertaintySet::ball(PNorm::Two, vec![0.0; 5], 2.0).unwrap();
        let got = p.analytic_truth(&set).unwrap();
        assert!((got - 0.5_f64.powi(5)).abs() < 1e-15);

        // Predicate ball larger than the set saturates at 1.
        let small = UncertaintySet::ball(PNorm::Two, vec![0.0; 5], 0.5).unwrap();
        assert_eq!(p.analytic_truth(&small), Some(1.0));

        // Off-center or non-Euclidean sets have no closed form here.
        let shifted = UncertaintySet::ball(PNorm::Two, vec![0.1, 0.0], 2.0).unwrap();
        assert_eq!(p.analytic_truth(&shifted), None);
        let l1 = UncertaintySet::ball(PNorm::One, vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(p.analytic_truth(&l1), None);
    }

    #[test]
    fn analytic_truth_inner_ball_on_donut() {
        let p = Predicate::InnerBall { radius: 1.5 };
        let set = UncertaintySet::donut(vec![0.0, 0.0], 1.0, 2.0).unwrap();
        let got = p.analytic_truth(&set).unwrap();
        assert!((got - (2.25 - 1.0) / (4.0 - 1.0)).abs() < 1e-15);

        let below_hole = Predicate::InnerBall { radius: 0.5 };
        assert_eq!(below_hole.analytic_truth(&set), Some(0.0));
    }

    #[test]
    fn analytic_truth_halfspace_through_center() {
        let set = UncertaintySet::ball(PNorm::One, vec![1.0, 2.0], 3.0).unwrap();
        let through = Predicate::Halfspace {
            normal: vec![2.0, 1.0],
            offset: 4.0,
        };
        assert_eq!(through.analytic_truth(&set), Some(0.5));

        let misses = Predicate::Halfspace {
            normal: vec![2.0, 1.0],
            offset: 5.0,
        };
        assert_eq!(misses.analytic_truth(&set), None);
    }

    #[test]
    fn custom_predicate_errors_surface_with_name() {
        let p = Predicate::custom("fussy", |x| {
            if x[0].is_nan() {
                Err("nan input".to_owned())
            } else {
                Ok(x[0] > 0.0)
            }
        });
        assert!(p.evaluate(&[1.0]).unwrap());
        let err = p.evaluate(&[f64::NAN]).unwrap_err();
        assert!(err.to_string().contains("fussy"));
        assert!(err.to_string().contains("nan input"));
    }

    #[test]
    fn counting_wrapper_counts_every_evaluation() {
        let (p, counter) = Predicate::InnerBall { radius: 1.0 }.counting();
        for i in 0..17 {
            let _ = p.evaluate(&[i as f64 / 17.0, 0.0]).unwrap();
        }
        assert_eq!(counter.load(Ordering::Relaxed), 17);
    }
}
