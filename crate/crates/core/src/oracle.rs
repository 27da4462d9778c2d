//! Closed-form cost expectations and bounds, checked against measured
//! ledgers.
//!
//! For a nested chain the expected number of fresh draws at set `i` is
//! `N * (1 - v_i / v_{i+1})` (and `N` at the largest set), so the expected
//! total is `N * (m - sum_i v_i / v_{i+1})`, which stays below
//! `(1 + ln(v_max / v_min)) * N` no matter how long the chain is.

use thiserror::Error;

use crate::chain::NestedChain;
use crate::engine::ReuseLedger;
use crate::stats::mean_stderr;

/// Expected fresh draws per set (smallest first) when delivering
/// `samples_per_set` to every set of `chain`.
#[must_use]
pub fn expected_fresh(chain: &NestedChain, samples_per_set: usize) -> Vec<f64> {
    let n = samples_per_set as f64;
    let m = chain.len();
    (0..m)
        .map(|i| {
            if i + 1 == m {
                n
            } else {
                n * (1.0 - chain.volume_ratio(i))
            }
        })
        .collect()
}

/// Expected total fresh draws across the chain.
#[must_use]
pub fn expected_total(chain: &NestedChain, samples_per_set: usize) -> f64 {
    expected_fresh(chain, samples_per_set).iter().sum()
}

/// Oracle failures.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("volumes must be positive and finite with v_min <= v_max, got {v_min} and {v_max}")]
    BadVolumes { v_min: f64, v_max: f64 },
    #[error("radii must be positive and finite with r_min <= r_max, got {r_min} and {r_max}")]
    BadRadii { r_min: f64, r_max: f64 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("need at least {needed} ledgers, got {got}")]
    TooFewLedgers { needed: usize, got: usize },
    #[error("ledger {index} has {got} sets, expected {expected}")]
    MixedChainLength {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("ledger {index} delivered {got} samples per set, expected {expected}")]
    MixedSampleCounts {
        index: usize,
        got: u64,
        expected: u64,
    },
    #[error("all {0} ledgers were truncated; no clean trials to compare against the oracle")]
    AllTruncated(usize),
}

/// Upper bound `(1 + ln(v_max / v_min)) * N` on the expected total number
/// of fresh draws, valid for every nested chain with volumes between
/// `v_min` and `v_max` — independent of the number of sets.
pub fn theorem_bound(v_min: f64, v_max: f64, samples_per_set: usize) -> Result<f64, OracleError> {
    if !(v_min.is_finite() && v_max.is_finite() && v_min > 0.0 && v_min <= v_max) {
        return Err(OracleError::BadVolumes { v_min, v_max });
    }
    Ok((1.0 + (v_max / v_min).ln()) * samples_per_set as f64)
}

/// The [`theorem_bound`] specialized to scaling families where volume grows
/// like `radius^dimension`: `(1 + d * ln(r_max / r_min)) * N`.
pub fn corollary_bound(
    dimension: usize,
    r_min: f64,
    r_max: f64,
    samples_per_set: usize,
) -> Result<f64, OracleError> {
    if dimension == 0 {
        return Err(OracleError::ZeroDimension);
    }
    if !(r_min.is_finite() && r_max.is_finite() && r_min > 0.0 && r_min <= r_max) {
        return Err(OracleError::BadRadii { r_min, r_max });
    }
    let d = dimension as f64;
    Ok((1.0 + d * (r_max / r_min).ln()) * samples_per_set as f64)
}

/// Measured-versus-expected cost for one set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetCost {
    /// Closed-form expectation of fresh draws.
    pub expected: f64,
    /// Mean fresh draws over the clean (untruncated) trials.
    pub mean: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    /// `(mean - expected) / stderr`; `None` when the trials all agree
    /// exactly (stderr is zero), which is an exact match whenever
    /// `mean == expected`.
    pub z: Option<f64>,
}

impl SetCost {
    /// Degenerate-but-perfect case: no spread and dead on the expectation.
    #[must_use]
    pub fn exact_match(&self) -> bool {
        self.stderr == 0.0 && self.mean == self.expected
    }
}

/// Comparison of measured ledgers against the closed-form cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    /// Per-set comparison, smallest set first.
    pub per_set: Vec<SetCost>,
    /// Closed-form expected total fresh draws.
    pub expected_total: f64,
    /// Mean measured total over clean trials.
    pub total_mean: f64,
    pub total_stderr: f64,
    pub total_z: Option<f64>,
    /// Chain-independent bound from the volume extremes.
    pub theorem_bound: f64,
    /// Scaling-family bound, when the chain is one.
    pub corollary_bound: Option<f64>,
    /// All trials seen, including truncated ones.
    pub trials: usize,
    /// Trials dropped from the statistics because a pool overflowed.
    pub truncated_trials: usize,
    /// Samples delivered per set in every trial.
    pub samples_per_set: u64,
}

/// Compares measured ledgers against the closed-form expectations for
/// `chain`. Trials whose pools overflowed (possible only on non-nested
/// chains) are counted but excluded from means; everything else about the
/// ledgers must agree — mixed chain lengths or sample counts are errors.
pub fn trial_statistics(
    ledgers: &[ReuseLedger],
    chain: &NestedChain,
) -> Result<CostReport, OracleError> {
    if ledgers.len() < 2 {
        return Err(OracleError::TooFewLedgers {
            needed: 2,
            got: ledgers.len(),
        });
    }
    let m = chain.len();
    let n = ledgers[0].delivered_per_set;
    for (index, ledger) in ledgers.iter().enumerate() {
        if ledger.sets() != m {
            return Err(OracleError::MixedChainLength {
                index,
                got: ledger.sets(),
                expected: m,
            });
        }
        if ledger.delivered_per_set != n {
            return Err(OracleError::MixedSampleCounts {
                index,
                got: ledger.delivered_per_set,
                expected: n,
            });
        }
    }
    let clean: Vec<&ReuseLedger> = ledgers.iter().filter(|l| !l.truncated()).collect();
    let truncated_trials = ledgers.len() - clean.len();
    if clean.is_empty() {
        return Err(OracleError::AllTruncated(ledgers.len()));
    }

    let expected = expected_fresh(chain, n as usize);
    let per_set = (0..m)
        .map(|i| {
            let samples: Vec<f64> = clean.iter().map(|l| l.fresh[i] as f64).collect();
            let (mean, stderr) = mean_stderr(&samples);
            SetCost {
                expected: expected[i],
                mean,
                stderr,
                z: z_score(mean, expected[i], stderr),
            }
        })
        .collect::<Vec<_>>();

    let totals: Vec<f64> = clean.iter().map(|l| l.total_fresh() as f64).collect();
    let (total_mean, total_stderr) = mean_stderr(&totals);
    let expected_total: f64 = expected.iter().sum();

    let volumes = chain.volumes();
    let v_min = volumes.iter().cloned().fold(f64::INFINITY, f64::min);
    let v_max = volumes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let theorem = theorem_bound(v_min, v_max, n as usize)?;
    let corollary = match chain.scaling_radii() {
        Some(radii) => {
            let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
            let r_max = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some(corollary_bound(chain.dimension(), r_min, r_max, n as usize)?)
        }
        None => None,
    };

    Ok(CostReport {
        per_set,
        expected_total,
        total_mean,
        total_stderr,
        total_z: z_score(total_mean, expected_total, total_stderr),
        theorem_bound: theorem,
        corollary_bound: corollary,
        trials: ledgers.len(),
        truncated_trials,
        samples_per_set: n,
    })
}

fn z_score(mean: f64, expected: f64, stderr: f64) -> Option<f64> {
    (stderr > 0.0).then(|| (mean - expected) / stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_chain, ChainSpec, PNorm};

    fn volume_chain(volumes: &[f64]) -> NestedChain {
        build_chain(&ChainSpec::BallVolumes {
            norm: PNorm::Two,
            center: vec![0.0; 3],
            volumes: volumes.to_vec(),
        })
        .unwrap()
    }

    #[test]
    fn expected_fresh_matches_volume_ratios() {
        let chain = volume_chain(&[1.0, 2.0, 4.0]);
        let got = expected_fresh(&chain, 100);
        for (g, want) in got.iter().zip([50.0, 50.0, 100.0]) {
            assert!((g - want).abs() < 1e-9, "{g} vs {want}");
        }
        assert!((expected_total(&chain, 100) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn expected_fresh_on_equal_sets_is_zero() {
        let chain = volume_chain(&[3.0, 3.0, 3.0]);
        let got = expected_fresh(&chain, 50);
        assert!(got[0].abs() < 1e-9);
        assert!(got[1].abs() < 1e-9);
        assert!((got[2] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn theorem_bound_matches_hand_value_and_caps_expectation() {
        let bound = theorem_bound(1.0, 4.0, 100).unwrap();
        assert!((bound - (1.0 + 4.0_f64.ln()) * 100.0).abs() < 1e-9);

        let chain = volume_chain(&[1.0, 2.0, 4.0]);
        assert!(expected_total(&chain, 100) < bound);
    }

    #[test]
    fn corollary_bound_matches_theorem_bound_for_scaling_chains() {
        // Volume ratio across a radius-doubling in d dimensions is 2^d, so
        // both bounds coincide.
        let theorem = theorem_bound(1.0, 32.0, 10).unwrap();
        let corollary = corollary_bound(5, 1.0, 2.0, 10).unwrap();
        assert!((theorem - corollary).abs() < 1e-9);
    }

    #[test]
    fn bounds_reject_degenerate_inputs() {
        assert!(theorem_bound(0.0, 1.0, 10).is_err());
        assert!(theorem_bound(2.0, 1.0, 10).is_err());
        assert!(theorem_bound(f64::NAN, 1.0, 10).is_err());
        assert!(corollary_bound(0, 1.0, 2.0, 10).is_err());
        assert!(corollary_bound(3, -1.0, 2.0, 10).is_err());
    }

    fn ledger(fresh: Vec<u64>, n: u64) -> ReuseLedger {
        let m = fresh.len();
        ReuseLedger {
            reused: fresh.iter().map(|f| n - f).collect(),
            fresh,
            surplus: vec![0; m],
            delivered_per_set: n,
        }
    }

    #[test]
    fn trial_statistics_reports_z_scores() {
        let chain = volume_chain(&[1.0, 2.0, 4.0]);
        let ledgers = vec![
            ledger(vec![48, 52, 100], 100),
            ledger(vec![52, 48, 100], 100),
            ledger(vec![50, 50, 100], 100),
        ];
        let report = trial_statistics(&ledgers, &chain).unwrap();
        assert_eq!(report.trials, 3);
        assert_eq!(report.truncated_trials, 0);
        assert!((report.per_set[0].mean - 50.0).abs() < 1e-9);
        assert!(report.per_set[0].z.unwrap().abs() < 1e-9);
        // The largest set is always exactly N fresh.
        assert!(report.per_set[2].exact_match());
        assert_eq!(report.per_set[2].z, None);
        assert!((report.expected_total - 200.0).abs() < 1e-9);
        assert!(report.corollary_bound.is_some());
        assert!(report.expected_total < report.theorem_bound);
    }

    #[test]
    fn trial_statistics_conditions_on_clean_trials() {
        let chain = volume_chain(&[1.0, 2.0, 4.0]);
        let mut bad = ledger(vec![0, 50, 100], 100);
        bad.surplus[0] = 7;
        let ledgers = vec![
            ledger(vec![50, 50, 100], 100),
            ledger(vec![50, 50, 100], 100),
            bad,
        ];
        let report = trial_statistics(&ledgers, &chain).unwrap();
        assert_eq!(report.trials, 3);
        assert_eq!(report.truncated_trials, 1);
        // The truncated trial's zero-fresh set does not drag the mean down.
        assert!((report.per_set[0].mean - 50.0).abs() < 1e-9);
    }

    #[test]
    fn trial_statistics_rejects_mixed_or_missing_ledgers() {
        let chain = volume_chain(&[1.0, 2.0, 4.0]);
        let one = vec![ledger(vec![50, 50, 100], 100)];
        assert!(matches!(
            trial_statistics(&one, &chain),
            Err(OracleError::TooFewLedgers { got: 1, .. })
        ));

        let mixed_m = vec![ledger(vec![50, 50, 100], 100), ledger(vec![100, 100], 100)];
        assert!(matches!(
            trial_statistics(&mixed_m, &chain),
            Err(OracleError::MixedChainLength { index: 1, .. })
        ));

        let mixed_n = vec![ledger(vec![50, 50, 100], 100), ledger(vec![25, 25, 50], 50)];
        assert!(matches!(
            trial_statistics(&mixed_n, &chain),
            Err(OracleError::MixedSampleCounts { index: 1, .. })
        ));

        let mut bad = ledger(vec![0, 50, 100], 100);
        bad.surplus[0] = 1;
        let all_truncated = vec![bad.clone(), bad];
        assert!(matches!(
            trial_statistics(&all_truncated, &chain),
            Err(OracleError::AllTruncated(2))
        ));
    }

    #[test]
    fn expected_total_is_m_independent_at_fixed_volume_range() {
        // Same volume extremes, very different chain lengths: both expected
        // totals sit under the one bound.
        let short = volume_chain(&[1.0, 4.0]);
        let geometric: Vec<f64> = (0..40).map(|i| 4.0_f64.powf(i as f64 / 39.0)).collect();
        let long = volume_chain(&geometric);
        let bound = theorem_bound(1.0, 4.0, 1000).unwrap();
        assert!(expected_total(&short, 1000) < bound);
        assert!(expected_total(&long, 1000) < bound);
    }
}
