//! Exact uniform samplers for every supported set family.
//!
//! All samplers are direct transforms — no rejection loops — so the cost per
//! point is deterministic and every drawn value is consumed.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::chain::{BoxComponent, PNorm, Point, Shape, UncertaintySet};
use crate::stream::RandomStream;

impl UncertaintySet {
    /// Draws one point uniformly from the set.
    #[must_use]
    pub fn sample_uniform(&self, rng: &mut RandomStream) -> Point {
        let d = self.dimension();
        let mut point = match self.shape() {
            Shape::Ball { norm, radius } => match norm {
                PNorm::Two => euclidean_shell(d, 0.0, *radius, rng),
                PNorm::Inf => box_point(&vec![*radius; d], rng),
                PNorm::One => cross_polytope(d, *radius, rng),
            },
            Shape::Box { half_widths } => box_point(half_widths, rng),
            Shape::Donut {
                hole_radius,
                radius,
            } => euclidean_shell(d, *hole_radius, *radius, rng),
            Shape::BoxUnion { components } => union_point(components, rng),
        };
        for (x, c) in point.iter_mut().zip(self.center()) {
            *x += c;
        }
        point
    }
}

/// Uniform point in the Euclidean shell `inner <= |x| <= outer`, centered at
/// the origin; `inner = 0` gives the solid ball. Direction comes from
/// normalized Gaussians, the radius from inverting the shell's radial volume
/// fraction `(r^d - inner^d) / (outer^d - inner^d)`.
fn euclidean_shell(d: usize, inner: f64, outer: f64, rng: &mut RandomStream) -> Point {
    let mut direction: Vec<f64> = Vec::with_capacity(d);
    loop {
        direction.clear();
        direction.extend((0..d).map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g
        }));
        let norm = PNorm::Two.eval(&direction);
        if norm > 0.0 {
            for x in &mut direction {
                *x /= norm;
            }
            break;
        }
    }
    let dd = d as f64;
    let rho = (inner / outer).powf(dd);
    let u: f64 = rng.random();
    let radius = outer * (rho + u * (1.0 - rho)).powf(1.0 / dd);
    for x in &mut direction {
        *x *= radius;
    }
    direction
}

/// Uniform point in the origin-centered box with the given half-widths.
fn box_point(half_widths: &[f64], rng: &mut RandomStream) -> Point {
    half_widths
        .iter()
        .map(|w| {
            let u: f64 = rng.random();
            w * (2.0 * u - 1.0)
        })
        .collect()
}

/// Uniform point in the `l1` ball of the given radius: a point on the solid
/// probability simplex (exponential spacings, last coordinate dropped) with
/// independent random signs.
fn cross_polytope(d: usize, radius: f64, rng: &mut RandomStream) -> Point {
    let draws: Vec<f64> = (0..=d)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e
        })
        .collect();
    let total: f64 = draws.iter().sum();
    draws[..d]
        .iter()
        .map(|e| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * radius * e / total
        })
        .collect()
}

/// Uniform point in a disjoint union: pick a component with probability
/// proportional to its volume, then sample inside it.
fn union_point(components: &[BoxComponent], rng: &mut RandomStream) -> Point {
    let volumes: Vec<f64> = components
        .iter()
        .map(|part| {
            part.half_widths
                .iter()
                .map(|w| (2.0 * w).ln())
                .sum::<f64>()
        })
        .collect();
    let max = volumes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = volumes.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut pick: f64 = rng.random::<f64>() * total;
    let mut chosen = components.len() - 1;
    for (index, w) in weights.iter().enumerate() {
        if pick < *w {
            chosen = index;
            break;
        }
        pick -= w;
    }
    let part = &components[chosen];
    let mut point = box_point(&part.half_widths, rng);
    for (x, c) in point.iter_mut().zip(&part.center) {
        *x += c;
    }
    point
}
