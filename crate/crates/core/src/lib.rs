//! Monte Carlo estimation over nested chains of uncertainty sets.
//!
//! Checking a requirement at many uncertainty levels naively costs `N` fresh
//! samples per level. When the levels form a nested chain, a sample drawn
//! uniformly from a larger set and landing inside a smaller one is also a
//! uniform sample of the smaller set, so its (already evaluated) outcome can
//! be reused. This crate provides:
//!
//! - set geometry and verified nested chains ([`chain`]),
//! - reproducible splittable random streams ([`stream`]),
//! - exact uniform samplers for every supported set family ([`sample`]),
//! - the reuse schedule and its cost ledger ([`engine`]),
//! - robustness curves, exact binomial intervals, margins, and the
//!   donut-combined estimator ([`estimate`]),
//! - closed-form cost expectations and bounds ([`oracle`]),
//! - built-in requirement predicates ([`predicate`]).
//!
//! The expected number of fresh samples for the whole chain stays below
//! `(1 + ln(v_max/v_min)) * N` regardless of how many levels the chain has.

pub mod chain;
pub mod engine;
pub mod estimate;
pub mod oracle;
pub mod predicate;
pub mod sample;
pub mod stats;
pub mod stream;

pub use chain::{
    audit_nestedness, build_chain, AuditReport, AuditViolation, BoxComponent, ChainError,
    ChainSpec, NestedChain, NestingVerification, PNorm, Point, Shape, UncertaintySet,
};
pub use engine::{naive_run, run, EngineError, ReuseLedger, RunOutput, SampleRecord};
pub use estimate::{
    binomial_ci, curve_from_counts, curve_infimum, donut_reconstruct, estimate_curve, margin,
    margin_with, variance_ratio, CurvePoint, DonutEstimate, EstimateError, Margin, MarginBasis,
    RobustnessCurve,
};
pub use oracle::{
    corollary_bound, expected_fresh, expected_total, theorem_bound, trial_statistics,
    CostReport, OracleError, SetCost,
};
pub use predicate::{CoefficientMap, Predicate, PredicateError};
pub use stream::{make_stream, Purpose, RandomStream, GENERATOR_NAME};
