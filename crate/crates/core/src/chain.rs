//! Uncertainty sets and verified nested chains.
//!
//! A chain is a sequence of sets ordered smallest to largest, each contained
//! in the next. Construction either proves nestedness analytically
//! ([`NestedChain::from_sets`], [`build_chain`]) or defers to a statistical
//! audit ([`audit_nestedness`]) when the caller opted out of proof with
//! [`NestedChain::assume_nested`].

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::stream::RandomStream;

/// A point in `R^d`.
pub type Point = Vec<f64>;

/// Which norm a ball is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PNorm {
    /// `l1` (cross-polytope balls).
    One,
    /// Euclidean.
    Two,
    /// `l-infinity` (axis-aligned cubes).
    Inf,
}

impl PNorm {
    /// Evaluates the norm of `v`.
    #[must_use]
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            PNorm::One => v.iter().map(|x| x.abs()).sum(),
            PNorm::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            PNorm::Inf => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        }
    }

    /// Natural log of the volume of the unit ball in `R^d` for this norm.
    #[must_use]
    pub fn ln_unit_ball_volume(self, dimension: usize) -> f64 {
        let d = dimension as f64;
        match self {
            PNorm::One => d * (2.0_f64).ln() - ln_gamma(d + 1.0),
            PNorm::Two => 0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d + 1.0),
            PNorm::Inf => d * (2.0_f64).ln(),
        }
    }
}

impl std::fmt::Display for PNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PNorm::One => write!(f, "1"),
            PNorm::Two => write!(f, "2"),
            PNorm::Inf => write!(f, "inf"),
        }
    }
}

/// One axis-aligned box of a union, given by its own center and half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxComponent {
    pub center: Point,
    pub half_widths: Vec<f64>,
}

impl BoxComponent {
    fn contains(&self, point: &[f64]) -> bool {
        self.center
            .iter()
            .zip(&self.half_widths)
            .zip(point)
            .all(|((c, w), x)| (x - c).abs() <= *w)
    }

    fn ln_volume(&self) -> f64 {
        self.half_widths.iter().map(|w| (2.0 * w).ln()).sum()
    }
}

/// The geometry of a single uncertainty set, relative to the set's center.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Norm ball of the given radius.
    Ball { norm: PNorm, radius: f64 },
    /// Axis-aligned box with per-axis half-widths.
    Box { half_widths: Vec<f64> },
    /// Euclidean shell: points with `hole_radius <= |x - c| <= radius`.
    Donut { hole_radius: f64, radius: f64 },
    /// Union of pairwise disjoint axis-aligned boxes. Component centers are
    /// absolute coordinates; the set's own center shifts all of them.
    BoxUnion { components: Vec<BoxComponent> },
}

/// A single uncertainty set: a shape placed at a center in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySet {
    shape: Shape,
    dimension: usize,
    center: Point,
    ln_volume: f64,
}

/// Everything that can go wrong building sets, chains, or querying them.
#[derive(Debug, Error)]
pub enum ChainError {
    #[error("dimension mismatch: set lives in R^{set_dim}, point in R^{point_dim}")]
    DimensionMismatch { set_dim: usize, point_dim: usize },
    #[error("center has {center_len} coordinates but dimension is {dimension}")]
    BadCenter { center_len: usize, dimension: usize },
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("volume must be positive and finite, got {0}")]
    BadVolume(f64),
    #[error("half-width {index} must be positive and finite, got {value}")]
    BadHalfWidth { index: usize, value: f64 },
    #[error("donut needs 0 < hole radius < radius, got hole {hole} and radius {radius}")]
    BadDonut { hole: f64, radius: f64 },
    #[error("box union needs at least one component")]
    EmptyUnion,
    #[error("union components {0} and {1} overlap")]
    OverlappingComponents(usize, usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("chain needs at least one set")]
    EmptyChain,
    #[error("chain mixes dimensions: set 0 lives in R^{first}, set {index} in R^{other}")]
    MixedDimensions { index: usize, first: usize, other: usize },
    #[error("volume decreases from set {0} to set {1}; chains are ordered smallest to largest")]
    NonMonotoneVolumes(usize, usize),
    #[error("set {inner} is provably not contained in set {outer}")]
    NotNested { inner: usize, outer: usize },
    #[error("scale {index} must be positive and finite, got {value}")]
    BadScale { index: usize, value: f64 },
    #[error("center coordinate must be finite, got {0}")]
    NonFiniteCenter(f64),
    #[error("{widths} half-widths given for dimension {dimension}")]
    MismatchedWidths { widths: usize, dimension: usize },
    #[error("chain spec needs at least one radius/scale")]
    EmptyRadii,
    #[error("audit needs at least one sample per set")]
    ZeroAuditSamples,
}

fn check_center(center: &[f64], dimension: usize) -> Result<(), ChainError> {
    if dimension == 0 {
        return Err(ChainError::ZeroDimension);
    }
    if center.len() != dimension {
        return Err(ChainError::BadCenter {
            center_len: center.len(),
            dimension,
        });
    }
    if let Some(bad) = center.iter().find(|c| !c.is_finite()) {
        return Err(ChainError::NonFiniteCenter(*bad));
    }
    Ok(())
}

fn check_radius(radius: f64) -> Result<(), ChainError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(ChainError::BadRadius(radius));
    }
    Ok(())
}

fn check_half_widths(half_widths: &[f64]) -> Result<(), ChainError> {
    if half_widths.is_empty() {
        return Err(ChainError::ZeroDimension);
    }
    for (index, &value) in half_widths.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(ChainError::BadHalfWidth { index, value });
        }
    }
    Ok(())
}

/// `ln(exp(a) - exp(b))` for `a > b`, stable when both are large.
fn ln_diff_exp(a: f64, b: f64) -> f64 {
    a + (-(b - a).exp()).ln_1p()
}

/// `ln(sum_i exp(x_i))`, stable.
fn ln_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl UncertaintySet {
    /// Norm ball of `radius` around `center`.
    pub fn ball(norm: PNorm, center: Point, radius: f64) -> Result<Self, ChainError> {
        let dimension = center.len();
        check_center(&center, dimension)?;
        check_radius(radius)?;
        let ln_volume = norm.ln_unit_ball_volume(dimension) + dimension as f64 * radius.ln();
        Ok(Self {
            shape: Shape::Ball { norm, radius },
            dimension,
            center,
            ln_volume,
        })
    }

    /// Axis-aligned box around `center` with per-axis `half_widths`.
    pub fn axis_box(center: Point, half_widths: Vec<f64>) -> Result<Self, ChainError> {
        let dimension = center.len();
        check_center(&center, dimension)?;
        check_half_widths(&half_widths)?;
        if half_widths.len() != dimension {
            return Err(ChainError::MismatchedWidths {
                widths: half_widths.len(),
                dimension,
            });
        }
        let ln_volume = half_widths.iter().map(|w| (2.0 * w).ln()).sum();
        Ok(Self {
            shape: Shape::Box { half_widths },
            dimension,
            center,
            ln_volume,
        })
    }

    /// Euclidean shell between `hole_radius` and `radius` around `center`.
    pub fn donut(center: Point, hole_radius: f64, radius: f64) -> Result<Self, ChainError> {
        let dimension = center.len();
        check_center(&center, dimension)?;
        check_radius(radius)?;
        if !(hole_radius.is_finite() && hole_radius > 0.0 && hole_radius < radius) {
            return Err(ChainError::BadDonut {
                hole: hole_radius,
                radius,
            });
        }
        let d = dimension as f64;
        let ln_volume = PNorm::Two.ln_unit_ball_volume(dimension)
            + ln_diff_exp(d * radius.ln(), d * hole_radius.ln());
        Ok(Self {
            shape: Shape::Donut {
                hole_radius,
                radius,
            },
            dimension,
            center,
            ln_volume,
        })
    }

    /// Union of pairwise disjoint axis-aligned boxes, shifted by `center`.
    pub fn box_union(center: Point, components: Vec<BoxComponent>) -> Result<Self, ChainError> {
        let dimension = center.len();
        check_center(&center, dimension)?;
        if components.is_empty() {
            return Err(ChainError::EmptyUnion);
        }
        for part in &components {
            check_center(&part.center, dimension)?;
            check_half_widths(&part.half_widths)?;
            if part.half_widths.len() != dimension {
                return Err(ChainError::MismatchedWidths {
                    widths: part.half_widths.len(),
                    dimension,
                });
            }
        }
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                if boxes_overlap(&components[i], &components[j]) {
                    return Err(ChainError::OverlappingComponents(i, j));
                }
            }
        }
        let ln_volume = ln_sum_exp(
            &components
                .iter()
                .map(BoxComponent::ln_volume)
                .collect::<Vec<_>>(),
        );
        Ok(Self {
            shape: Shape::BoxUnion { components },
            dimension,
            center,
            ln_volume,
        })
    }

    #[must_use]
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    #[must_use]
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    #[must_use]
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Lebesgue volume of the set.
    #[must_use]
    pub fn volume(&self) -> f64 {
        self.ln_volume.exp()
    }

    /// Natural log of the volume; exact for sizes where `volume` would
    /// overflow or underflow.
    #[must_use]
    pub fn ln_volume(&self) -> f64 {
        self.ln_volume
    }

    /// Whether `point` lies in the (closed) set.
    pub fn contains(&self, point: &[f64]) -> Result<bool, ChainError> {
        if point.len() != self.dimension {
            return Err(ChainError::DimensionMismatch {
                set_dim: self.dimension,
                point_dim: point.len(),
            });
        }
        Ok(self.contains_unchecked(point))
    }

    pub(crate) fn contains_unchecked(&self, point: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { norm, radius } => {
                let diff: Vec<f64> = point
                    .iter()
                    .zip(&self.center)
                    .map(|(x, c)| x - c)
                    .collect();
                norm.eval(&diff) <= *radius
            }
            Shape::Box { half_widths } => self
                .center
                .iter()
                .zip(half_widths)
                .zip(point)
                .all(|((c, w), x)| (x - c).abs() <= *w),
            Shape::Donut {
                hole_radius,
                radius,
            } => {
                let diff: Vec<f64> = point
                    .iter()
                    .zip(&self.center)
                    .map(|(x, c)| x - c)
                    .collect();
                let dist = PNorm::Two.eval(&diff);
                *hole_radius <= dist && dist <= *radius
            }
            Shape::BoxUnion { components } => {
                let shifted: Vec<f64> = point
                    .iter()
                    .zip(&self.center)
                    .map(|(x, c)| x - c)
                    .collect();
                components.iter().any(|part| part.contains(&shifted))
            }
        }
    }

    /// Normalized radial coordinate of `point` inside the set.
    ///
    /// For a point drawn uniformly from the set the value is `U(0, 1)`
    /// distributed, which makes it the test statistic for uniformity checks:
    /// balls map through `(|x - c|_p / r)^d`, boxes through the max of
    /// per-axis ratios raised to `d`, donuts through the volume fraction of
    /// the shell below the point's distance, and unions through the
    /// per-component box coordinate (a uniform mixture of uniforms). Points
    /// outside the set yield values above 1 (or below 0 inside a donut
    /// hole).
    pub fn radial_coordinate(&self, point: &[f64]) -> Result<f64, ChainError> {
        if point.len() != self.dimension {
            return Err(ChainError::DimensionMismatch {
                set_dim: self.dimension,
                point_dim: point.len(),
            });
        }
        let d = self.dimension as f64;
        let shifted: Vec<f64> = point
            .iter()
            .zip(&self.center)
            .map(|(x, c)| x - c)
            .collect();
        let value = match &self.shape {
            Shape::Ball { norm, radius } => (norm.eval(&shifted) / radius).powf(d),
            Shape::Box { half_widths } => shifted
                .iter()
                .zip(half_widths)
                .fold(0.0_f64, |m, (x, w)| m.max((x / w).abs()))
                .powf(d),
            Shape::Donut {
                hole_radius,
                radius,
            } => {
                let rho = hole_radius / radius;
                let t = (PNorm::Two.eval(&shifted) / radius).powf(d);
                (t - rho.powf(d)) / (1.0 - rho.powf(d))
            }
            Shape::BoxUnion { components } => {
                let inside = components.iter().find(|part| part.contains(&shifted));
                match inside {
                    Some(part) => part
                        .center
                        .iter()
                        .zip(&part.half_widths)
                        .zip(&shifted)
                        .fold(0.0_f64, |m, ((c, w), x)| m.max(((x - c) / w).abs()))
                        .powf(d),
                    None => f64::INFINITY,
                }
            }
        };
        Ok(value)
    }
}

fn boxes_overlap(a: &BoxComponent, b: &BoxComponent) -> bool {
    a.center
        .iter()
        .zip(&a.half_widths)
        .zip(b.center.iter().zip(&b.half_widths))
        .all(|((ca, wa), (cb, wb))| (ca - cb).abs() < wa + wb)
}

/// Outcome of trying to prove `inner` is a subset of `outer` analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SubsetProof {
    Proved,
    Disproved,
    Undecided,
}

/// Largest value of `|x|_q` over the unit `p`-ball in `R^d`.
fn norm_embedding_constant(p: PNorm, q: PNorm, d: usize) -> f64 {
    let inv = |n: PNorm| match n {
        PNorm::One => 1.0,
        PNorm::Two => 0.5,
        PNorm::Inf => 0.0,
    };
    let (ip, iq) = (inv(p), inv(q));
    if iq <= ip {
        1.0
    } else {
        (d as f64).powf(iq - ip)
    }
}

fn prove_subset(inner: &UncertaintySet, outer: &UncertaintySet) -> SubsetProof {
    let delta: Vec<f64> = inner
        .center
        .iter()
        .zip(&outer.center)
        .map(|(a, b)| a - b)
        .collect();
    match (&inner.shape, &outer.shape) {
        (
            Shape::Ball {
                norm: np,
                radius: rp,
            },
            Shape::Ball {
                norm: nq,
                radius: rq,
            },
        ) => {
            if np == nq {
                if nq.eval(&delta) + rp <= *rq {
                    SubsetProof::Proved
                } else {
                    SubsetProof::Disproved
                }
            } else {
                let c = norm_embedding_constant(*np, *nq, inner.dimension);
                if nq.eval(&delta) + rp * c <= *rq {
                    SubsetProof::Proved
                } else {
                    SubsetProof::Undecided
                }
            }
        }
        (Shape::Box { half_widths: wi }, Shape::Box { half_widths: wo }) => {
            let fits = delta
                .iter()
                .zip(wi)
                .zip(wo)
                .all(|((d, wi), wo)| d.abs() + wi <= *wo);
            if fits {
                SubsetProof::Proved
            } else {
                SubsetProof::Disproved
            }
        }
        (Shape::Ball { norm, radius }, Shape::Box { half_widths }) => {
            let _ = norm;
            let fits = delta
                .iter()
                .zip(half_widths)
                .all(|(d, w)| d.abs() + radius <= *w);
            if fits {
                SubsetProof::Proved
            } else if matches!(norm, PNorm::Inf) {
                SubsetProof::Disproved
            } else {
                SubsetProof::Undecided
            }
        }
        (Shape::Box { half_widths }, Shape::Ball { norm, radius }) => {
            let farthest: Vec<f64> = delta
                .iter()
                .zip(half_widths)
                .map(|(d, w)| d.abs() + w)
                .collect();
            if norm.eval(&farthest) <= *radius {
                SubsetProof::Proved
            } else {
                SubsetProof::Disproved
            }
        }
        (
            Shape::Donut {
                hole_radius: hi,
                radius: ri,
            },
            Shape::Donut {
                hole_radius: ho,
                radius: ro,
            },
        ) => {
            if delta.iter().all(|d| *d == 0.0) {
                if ho <= hi && ri <= ro {
                    SubsetProof::Proved
                } else {
                    SubsetProof::Disproved
                }
            } else {
                SubsetProof::Undecided
            }
        }
        (Shape::Donut { radius, .. }, Shape::Ball { norm, radius: ro }) => {
            let c = norm_embedding_constant(PNorm::Two, *norm, inner.dimension);
            if norm.eval(&delta) + radius * c <= *ro {
                SubsetProof::Proved
            } else if matches!(norm, PNorm::Two) {
                SubsetProof::Disproved
            } else {
                SubsetProof::Undecided
            }
        }
        (Shape::BoxUnion { components }, _) => {
            let mut all = SubsetProof::Proved;
            for part in components {
                let as_box = UncertaintySet {
                    shape: Shape::Box {
                        half_widths: part.half_widths.clone(),
                    },
                    dimension: inner.dimension,
                    center: part
                        .center
                        .iter()
                        .zip(&inner.center)
                        .map(|(c, shift)| c + shift)
                        .collect(),
                    ln_volume: part.ln_volume(),
                };
                match prove_subset(&as_box, outer) {
                    SubsetProof::Proved => {}
                    SubsetProof::Disproved => return SubsetProof::Disproved,
                    SubsetProof::Undecided => all = SubsetProof::Undecided,
                }
            }
            all
        }
        (_, Shape::BoxUnion { components }) => {
            for part in components {
                let as_box = UncertaintySet {
                    shape: Shape::Box {
                        half_widths: part.half_widths.clone(),
                    },
                    dimension: outer.dimension,
                    center: part
                        .center
                        .iter()
                        .zip(&outer.center)
                        .map(|(c, shift)| c + shift)
                        .collect(),
                    ln_volume: part.ln_volume(),
                };
                if prove_subset(inner, &as_box) == SubsetProof::Proved {
                    return SubsetProof::Proved;
                }
            }
            SubsetProof::Undecided
        }
        _ => SubsetProof::Undecided,
    }
}

/// How a chain's nestedness was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NestingVerification {
    /// Every consecutive containment was proved from the geometry.
    Analytic,
    /// Construction only checked dimensions and volume monotonicity; run
    /// [`audit_nestedness`] before trusting reuse results.
    Statistical,
}

/// A nested chain `B_1 ⊆ B_2 ⊆ … ⊆ B_m`, ordered smallest to largest.
#[derive(Debug, Clone)]
pub struct NestedChain {
    sets: Vec<UncertaintySet>,
    verification: NestingVerification,
}

impl NestedChain {
    /// Builds a chain from arbitrary sets, proving every consecutive
    /// containment. Pairs the prover cannot decide downgrade the chain to
    /// [`NestingVerification::Statistical`]; provable violations are errors.
    pub fn from_sets(sets: Vec<UncertaintySet>) -> Result<Self, ChainError> {
        let mut verification = NestingVerification::Analytic;
        Self::check_common(&sets)?;
        for i in 0..sets.len() - 1 {
            match prove_subset(&sets[i], &sets[i + 1]) {
                SubsetProof::Proved => {}
                SubsetProof::Disproved => {
                    return Err(ChainError::NotNested {
                        inner: i,
                        outer: i + 1,
                    })
                }
                SubsetProof::Undecided => verification = NestingVerification::Statistical,
            }
        }
        Ok(Self {
            sets,
            verification,
        })
    }

    /// Builds a chain checking only dimensions and volume monotonicity,
    /// marking it for statistical audit. Exists so audits have something to
    /// catch; prefer [`NestedChain::from_sets`].
    pub fn assume_nested(sets: Vec<UncertaintySet>) -> Result<Self, ChainError> {
        Self::check_common(&sets)?;
        Ok(Self {
            sets,
            verification: NestingVerification::Statistical,
        })
    }

    fn check_common(sets: &[UncertaintySet]) -> Result<(), ChainError> {
        if sets.is_empty() {
            return Err(ChainError::EmptyChain);
        }
        let first = sets[0].dimension;
        for (index, set) in sets.iter().enumerate() {
            if set.dimension != first {
                return Err(ChainError::MixedDimensions {
                    index,
                    first,
                    other: set.dimension,
                });
            }
        }
        for i in 0..sets.len() - 1 {
            if sets[i].ln_volume > sets[i + 1].ln_volume {
                return Err(ChainError::NonMonotoneVolumes(i, i + 1));
            }
        }
        Ok(())
    }

    /// Number of sets `m`.
    #[must_use]
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[must_use]
    pub fn sets(&self) -> &[UncertaintySet] {
        &self.sets
    }

    #[must_use]
    pub fn set(&self, index: usize) -> &UncertaintySet {
        &self.sets[index]
    }

    #[must_use]
    pub fn dimension(&self) -> usize {
        self.sets[0].dimension
    }

    #[must_use]
    pub fn verification(&self) -> NestingVerification {
        self.verification
    }

    /// Volumes, smallest set first.
    #[must_use]
    pub fn volumes(&self) -> Vec<f64> {
        self.sets.iter().map(UncertaintySet::volume).collect()
    }

    /// `v_i / v_{i+1}` for consecutive sets, computed in log space.
    #[must_use]
    pub fn volume_ratio(&self, index: usize) -> f64 {
        (self.sets[index].ln_volume - self.sets[index + 1].ln_volume).exp()
    }

    /// If every set is a rescaling of the first (balls sharing norm and
    /// center, boxes or unions with proportional half-widths), the scale
    /// sequence; volumes then grow like `scale^d`. `None` otherwise.
    #[must_use]
    pub fn scaling_radii(&self) -> Option<Vec<f64>> {
        let first = &self.sets[0];
        let mut radii = Vec::with_capacity(self.sets.len());
        for set in &self.sets {
            if set.center != first.center || set.dimension != first.dimension {
                return None;
            }
            let scale = match (&first.shape, &set.shape) {
                (
                    Shape::Ball { norm: n0, .. },
                    Shape::Ball {
                        norm: n1,
                        radius: r1,
                    },
                ) if n0 == n1 => *r1,
                (Shape::Box { half_widths: w0 }, Shape::Box { half_widths: w1 }) => {
                    proportional_scale(w0, w1)?
                }
                (Shape::BoxUnion { components: c0 }, Shape::BoxUnion { components: c1 }) => {
                    union_scale(c0, c1)?
                }
                _ => return None,
            };
            radii.push(scale);
        }
        match &first.shape {
            Shape::Ball { .. } => {}
            _ => {
                let base = radii[0];
                for r in &mut radii {
                    *r /= base;
                }
            }
        }
        Some(radii)
    }
}

fn proportional_scale(base: &[f64], scaled: &[f64]) -> Option<f64> {
    let s = scaled[0] / base[0];
    let ok = base
        .iter()
        .zip(scaled)
        .all(|(b, w)| (w - s * b).abs() <= 1e-12 * w.abs().max(1.0));
    ok.then_some(s)
}

fn union_scale(base: &[BoxComponent], scaled: &[BoxComponent]) -> Option<f64> {
    if base.len() != scaled.len() {
        return None;
    }
    let s = proportional_scale(&base[0].half_widths, &scaled[0].half_widths)?;
    for (b, o) in base.iter().zip(scaled) {
        proportional_scale(&b.half_widths, &o.half_widths)
            .filter(|t| (t - s).abs() <= 1e-12 * s)?;
        let centers_match = b
            .center
            .iter()
            .zip(&o.center)
            .all(|(cb, co)| (co - s * cb).abs() <= 1e-12 * co.abs().max(1.0));
        if !centers_match {
            return None;
        }
    }
    Some(s)
}

/// Recipe for a chain built from one shape family at increasing sizes.
///
/// Sizes are listed smallest to largest; every variant yields concentric
/// sets whose nestedness holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainSpec {
    /// Norm balls at the given radii.
    Balls {
        norm: PNorm,
        center: Point,
        radii: Vec<f64>,
    },
    /// Norm balls sized so set `i` has volume `volumes[i]`.
    BallVolumes {
        norm: PNorm,
        center: Point,
        volumes: Vec<f64>,
    },
    /// A base box rescaled by each factor in `scales`.
    Boxes {
        center: Point,
        half_widths: Vec<f64>,
        scales: Vec<f64>,
    },
    /// Euclidean shells sharing one hole, with growing outer radii.
    Donuts {
        center: Point,
        hole_radius: f64,
        outer_radii: Vec<f64>,
    },
    /// A base union of disjoint boxes rescaled by each factor in `scales`
    /// (component centers scale with the boxes, so components stay disjoint).
    BoxUnions {
        center: Point,
        components: Vec<BoxComponent>,
        scales: Vec<f64>,
    },
}

fn check_sizes(values: &[f64], label_equal_ok: bool) -> Result<(), ChainError> {
    if values.is_empty() {
        return Err(ChainError::EmptyRadii);
    }
    for (index, &value) in values.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(ChainError::BadScale { index, value });
        }
    }
    for i in 0..values.len() - 1 {
        let decreasing = if label_equal_ok {
            values[i] > values[i + 1]
        } else {
            values[i] >= values[i + 1]
        };
        if decreasing {
            return Err(ChainError::NonMonotoneVolumes(i, i + 1));
        }
    }
    Ok(())
}

/// Builds the concentric chain a [`ChainSpec`] describes.
///
/// Sizes must be non-decreasing (equal consecutive sets are allowed); the
/// result is always [`NestingVerification::Analytic`].
pub fn build_chain(spec: &ChainSpec) -> Result<NestedChain, ChainError> {
    let sets = match spec {
        ChainSpec::Balls {
            norm,
            center,
            radii,
        } => {
            check_sizes(radii, true)?;
            radii
                .iter()
                .map(|&r| UncertaintySet::ball(*norm, center.clone(), r))
                .collect::<Result<Vec<_>, _>>()?
        }
        ChainSpec::BallVolumes {
            norm,
            center,
            volumes,
        } => {
            check_sizes(volumes, true)?;
            let d = center.len();
            if d == 0 {
                return Err(ChainError::ZeroDimension);
            }
            let ln_unit = norm.ln_unit_ball_volume(d);
            volumes
                .iter()
                .map(|&v| {
                    let radius = ((v.ln() - ln_unit) / d as f64).exp();
                    UncertaintySet::ball(*norm, center.clone(), radius)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        ChainSpec::Boxes {
            center,
            half_widths,
            scales,
        } => {
            check_sizes(scales, true)?;
            check_half_widths(half_widths)?;
            scales
                .iter()
                .map(|&s| {
                    UncertaintySet::axis_box(
                        center.clone(),
                        half_widths.iter().map(|w| w * s).collect(),
                    )
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        ChainSpec::Donuts {
            center,
            hole_radius,
            outer_radii,
        } => {
            check_sizes(outer_radii, true)?;
            outer_radii
                .iter()
                .map(|&r| UncertaintySet::donut(center.clone(), *hole_radius, r))
                .collect::<Result<Vec<_>, _>>()?
        }
        ChainSpec::BoxUnions {
            center,
            components,
            scales,
        } => {
            check_sizes(scales, true)?;
            scales
                .iter()
                .map(|&s| {
                    let scaled = components
                        .iter()
                        .map(|part| BoxComponent {
                            center: part.center.iter().map(|c| c * s).collect(),
                            half_widths: part.half_widths.iter().map(|w| w * s).collect(),
                        })
                        .collect();
                    UncertaintySet::box_union(center.clone(), scaled)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    NestedChain::from_sets(sets)
}

/// One sampled counterexample to nestedness.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    /// Point drawn from `sets()[source_index]`.
    pub point: Point,
    pub source_index: usize,
    /// Larger set that failed to contain the point.
    pub failing_index: usize,
}

/// Result of sampling-based nestedness checking.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub violations: Vec<AuditViolation>,
    pub samples_per_set: usize,
    pub sets_checked: usize,
}

impl AuditReport {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Draws `samples_per_set` points from every set and checks each against all
/// larger sets, recording every violation. A clean report is evidence, not
/// proof; a violation is a certificate of non-nestedness.
pub fn audit_nestedness(
    chain: &NestedChain,
    samples_per_set: usize,
    rng: &mut RandomStream,
) -> Result<AuditReport, ChainError> {
    if samples_per_set == 0 {
        return Err(ChainError::ZeroAuditSamples);
    }
    let mut violations = Vec::new();
    for source_index in 0..chain.len() {
        for _ in 0..samples_per_set {
            let point = chain.set(source_index).sample_uniform(rng);
            for failing_index in source_index + 1..chain.len() {
                if !chain.set(failing_index).contains_unchecked(&point) {
                    violations.push(AuditViolation {
                        point: point.clone(),
                        source_index,
                        failing_index,
                    });
                }
            }
        }
    }
    Ok(AuditReport {
        violations,
        samples_per_set,
        sets_checked: chain.len(),
    })
}
