//! The sample-reuse schedule and its cost accounting.
//!
//! [`run`] walks the chain largest set first. For each smaller set it first
//! collects, in arrival order, every earlier sample that happens to lie
//! inside it — those are uniform on the smaller set by construction, and
//! their predicate outcomes carry over — then tops up with fresh draws until
//! the set has exactly `N` delivered samples. [`naive_run`] is the baseline
//! that redraws all `N` samples for every set.

use thiserror::Error;

use crate::chain::{NestedChain, Point};
use crate::predicate::{Predicate, PredicateError};
use crate::stream::RandomStream;

/// One evaluated sample.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub point: Point,
    /// Chain index of the set the point was drawn from.
    pub origin: usize,
    /// Predicate outcome, evaluated exactly once, at draw time.
    pub outcome: bool,
    /// Global draw counter; total order of all fresh draws in the run.
    pub arrival: u64,
    /// `membership[k]` for `k < origin`: does the point lie in set `k`?
    membership: Vec<bool>,
}

impl SampleRecord {
    /// Whether the point lies in chain set `set_index`. Indices at or above
    /// `origin` are `true` by nestedness.
    #[must_use]
    pub fn is_member(&self, set_index: usize) -> bool {
        set_index >= self.origin || self.membership[set_index]
    }
}

/// Per-set bookkeeping of where delivered samples came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseLedger {
    /// Fresh draws per set, smallest set first. This is the run's cost.
    pub fresh: Vec<u64>,
    /// Samples inherited from larger sets, per set.
    pub reused: Vec<u64>,
    /// Pooled samples beyond `N` that were set aside, per set. Always zero
    /// on truly nested chains; can fire on unaudited
    /// [`NestedChain::assume_nested`] chains.
    pub surplus: Vec<u64>,
    /// Samples delivered to every set (`N`).
    pub delivered_per_set: u64,
}

impl ReuseLedger {
    /// Total fresh draws across the chain.
    #[must_use]
    pub fn total_fresh(&self) -> u64 {
        self.fresh.iter().sum()
    }

    /// What the baseline would have cost: `N` per set.
    #[must_use]
    pub fn naive_cost(&self) -> u64 {
        self.delivered_per_set * self.fresh.len() as u64
    }

    /// Number of sets in the chain.
    #[must_use]
    pub fn sets(&self) -> usize {
        self.fresh.len()
    }

    /// Whether any set's reuse pool overflowed and was truncated.
    #[must_use]
    pub fn truncated(&self) -> bool {
        self.surplus.iter().any(|s| *s > 0)
    }
}

/// Everything a schedule produced: the sample arena, which records each set
/// received, and the cost ledger.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// All fresh samples, in arrival order.
    pub records: Vec<SampleRecord>,
    delivered: Vec<Vec<usize>>,
    pub ledger: ReuseLedger,
}

impl RunOutput {
    /// Number of sets in the chain.
    #[must_use]
    pub fn sets(&self) -> usize {
        self.delivered.len()
    }

    /// Indices into [`RunOutput::records`] of the samples delivered to set
    /// `set_index`, in arrival order.
    #[must_use]
    pub fn delivered_indices(&self, set_index: usize) -> &[usize] {
        &self.delivered[set_index]
    }

    /// The samples delivered to set `set_index`.
    pub fn delivered(&self, set_index: usize) -> impl Iterator<Item = &SampleRecord> {
        self.delivered[set_index].iter().map(|i| &self.records[*i])
    }

    /// Number of passing samples among those delivered to set `set_index`.
    #[must_use]
    pub fn success_count(&self, set_index: usize) -> u64 {
        self.delivered(set_index).filter(|r| r.outcome).count() as u64
    }

    /// Passing counts for every set, smallest first.
    #[must_use]
    pub fn success_counts(&self) -> Vec<u64> {
        (0..self.sets()).map(|i| self.success_count(i)).collect()
    }
}

/// Schedule failures.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("need at least one sample per set")]
    ZeroSamples,
    #[error("predicate failed on a sample from set {set} at {point:?}: {source}")]
    PredicateFailed {
        set: usize,
        point: Point,
        source: PredicateError,
    },
}

/// Runs the reuse schedule: every set ends up with exactly
/// `samples_per_set` uniform samples, but smaller sets are served from
/// larger sets' draws wherever possible.
///
/// If a set's pool of inherited samples exceeds `samples_per_set` — which
/// only a non-nested chain can cause — the first `samples_per_set` pooled
/// records in arrival order are delivered, no fresh draws are made, and the
/// overflow is recorded in [`ReuseLedger::surplus`].
pub fn run(
    chain: &NestedChain,
    samples_per_set: usize,
    predicate: &Predicate,
    rng: &mut RandomStream,
) -> Result<RunOutput, EngineError> {
    schedule(chain, samples_per_set, predicate, rng, true)
}

/// Runs the baseline schedule: `samples_per_set` fresh draws for every set,
/// nothing inherited. Same output shape as [`run`] so the two are directly
/// comparable.
pub fn naive_run(
    chain: &NestedChain,
    samples_per_set: usize,
    predicate: &Predicate,
    rng: &mut RandomStream,
) -> Result<RunOutput, EngineError> {
    schedule(chain, samples_per_set, predicate, rng, false)
}

fn schedule(
    chain: &NestedChain,
    samples_per_set: usize,
    predicate: &Predicate,
    rng: &mut RandomStream,
    reuse: bool,
) -> Result<RunOutput, EngineError> {
    if samples_per_set == 0 {
        return Err(EngineError::ZeroSamples);
    }
    let m = chain.len();
    let mut records: Vec<SampleRecord> = Vec::new();
    let mut delivered: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut fresh = vec![0_u64; m];
    let mut reused = vec![0_u64; m];
    let mut surplus = vec![0_u64; m];
    let mut arrival: u64 = 0;

    for set_index in (0..m).rev() {
        let mut pool: Vec<usize> = Vec::new();
        if reuse {
            pool.extend(
                records
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.is_member(set_index))
                    .map(|(i, _)| i),
            );
        }
        if pool.len() > samples_per_set {
            surplus[set_index] = (pool.len() - samples_per_set) as u64;
            pool.truncate(samples_per_set);
        }
        reused[set_index] = pool.len() as u64;
        let need = samples_per_set - pool.len();
        fresh[set_index] = need as u64;
        for _ in 0..need {
            let point = chain.set(set_index).sample_uniform(rng);
            let outcome =
                predicate
                    .evaluate(&point)
                    .map_err(|source| EngineError::PredicateFailed {
                        set: set_index,
                        point: point.clone(),
                        source,
                    })?;
            let membership = (0..set_index)
                .map(|k| chain.set(k).contains_unchecked(&point))
                .collect();
            pool.push(records.len());
            records.push(SampleRecord {
                point,
                origin: set_index,
                outcome,
                arrival,
                membership,
            });
            arrival += 1;
        }
        delivered[set_index] = pool;
    }

    Ok(RunOutput {
        records,
        delivered,
        ledger: ReuseLedger {
            fresh,
            reused,
            surplus,
            delivered_per_set: samples_per_set as u64,
        },
    })
}
