//! TOML experiment configuration: parsing, validation, and conversion into
//! chain, predicate, and label types.
//!
//! Every knob is an explicit key — there are no defaults for sample counts,
//! seeds, or geometry, so a config file is a complete record of its
//! experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use nestmc_core::{
    build_chain, BoxComponent, ChainError, ChainSpec, CoefficientMap, NestedChain, PNorm,
    Predicate, Shape, UncertaintySet,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_owned(),
        message: message.into(),
    }
}

/// Norm selector: `1`, `2`, `"1"`, `"2"`, or `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NormKey {
    Int(u64),
    Str(String),
}

impl NormKey {
    fn resolve(&self) -> Result<PNorm, ConfigError> {
        match self {
            NormKey::Int(1) => Ok(PNorm::One),
            NormKey::Int(2) => Ok(PNorm::Two),
            NormKey::Str(s) => match s.as_str() {
                "1" => Ok(PNorm::One),
                "2" => Ok(PNorm::Two),
                "inf" => Ok(PNorm::Inf),
                other => Err(invalid(
                    "chain.norm",
                    format!("must be 1, 2, or \"inf\", got \"{other}\""),
                )),
            },
            NormKey::Int(other) => Err(invalid(
                "chain.norm",
                format!("must be 1, 2, or \"inf\", got {other}"),
            )),
        }
    }
}

/// A list of sizes, written out or generated geometrically.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SizeList {
    Explicit(Vec<f64>),
    Geometric { geometric: GeometricSpec },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SizeList {
    fn resolve(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        let values = match self {
            SizeList::Explicit(values) => values.clone(),
            SizeList::Geometric { geometric } => {
                let GeometricSpec { min, max, count } = *geometric;
                if count < 2 {
                    return Err(invalid(field, "geometric count must be at least 2"));
                }
                if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
                    return Err(invalid(
                        field,
                        format!("geometric range needs 0 < min < max, got [{min}, {max}]"),
                    ));
                }
                let ratio = max / min;
                (0..count)
                    .map(|i| min * ratio.powf(i as f64 / (count - 1) as f64))
                    .collect()
            }
        };
        if values.is_empty() {
            return Err(invalid(field, "must not be empty"));
        }
        for (i, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(invalid(field, format!("entry {i} must be positive, got {v}")));
            }
        }
        if let Some(i) = (1..values.len()).find(|&i| values[i] <= values[i - 1]) {
            return Err(invalid(
                field,
                format!(
                    "must be strictly increasing, but entry {i} ({}) does not exceed entry {} ({})",
                    values[i],
                    i - 1,
                    values[i - 1]
                ),
            ));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
}

/// The `[chain]` table: one shape family at increasing sizes.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChainConfig {
    Ball {
        norm: Option<NormKey>,
        /// Per-set norms; an alternative to `norm` for chains that mix
        /// ball shapes (these can rarely be proved nested, so `audit` is
        /// advisable).
        norms: Option<Vec<NormKey>>,
        dimension: usize,
        center: Option<Vec<f64>>,
        radii: Option<SizeList>,
        volumes: Option<Vec<f64>>,
    },
    Box {
        half_widths: Vec<f64>,
        center: Option<Vec<f64>>,
        scales: SizeList,
    },
    Donut {
        dimension: usize,
        center: Option<Vec<f64>>,
        hole_radius: f64,
        outer_radii: SizeList,
    },
    BoxUnion {
        components: Vec<ComponentConfig>,
        center: Option<Vec<f64>>,
        scales: SizeList,
    },
}

fn resolve_center(
    center: &Option<Vec<f64>>,
    dimension: usize,
    field: &str,
) -> Result<Vec<f64>, ConfigError> {
    match center {
        None => Ok(vec![0.0; dimension]),
        Some(c) if c.len() == dimension => Ok(c.clone()),
        Some(c) => Err(invalid(
            field,
            format!("has {} coordinates but the chain dimension is {dimension}", c.len()),
        )),
    }
}

impl ChainConfig {
    /// Builds the chain plus the per-set labels used as the curve's radius
    /// axis (radii for balls and donuts, scale factors for boxes and
    /// unions).
    pub fn build(&self) -> Result<(NestedChain, Vec<f64>), ConfigError> {
        match self {
            ChainConfig::Ball {
                norm,
                norms,
                dimension,
                center,
                radii,
                volumes,
            } => {
                if *dimension == 0 {
                    return Err(invalid("chain.dimension", "must be at least 1"));
                }
                let center = resolve_center(center, *dimension, "chain.center")?;
                if let Some(norms) = norms {
                    if norm.is_some() {
                        return Err(invalid("chain", "give either norm or norms, not both"));
                    }
                    if volumes.is_some() {
                        return Err(invalid(
                            "chain.volumes",
                            "mixed-norm chains must be given as radii",
                        ));
                    }
                    let radii = radii
                        .as_ref()
                        .ok_or_else(|| invalid("chain", "norms requires radii"))?
                        .resolve("chain.radii")?;
                    if norms.len() != radii.len() {
                        return Err(invalid(
                            "chain.norms",
                            format!("has {} entries for {} radii", norms.len(), radii.len()),
                        ));
                    }
                    let sets = norms
                        .iter()
                        .zip(&radii)
                        .map(|(key, &radius)| {
                            Ok(UncertaintySet::ball(key.resolve()?, center.clone(), radius)?)
                        })
                        .collect::<Result<Vec<_>, ConfigError>>()?;
                    return Ok((NestedChain::from_sets(sets)?, radii));
                }
                let norm = norm
                    .as_ref()
                    .ok_or_else(|| invalid("chain", "needs a norm (or per-set norms)"))?
                    .resolve()?;
                let spec = match (radii, volumes) {
                    (Some(radii), None) => ChainSpec::Balls {
                        norm,
                        center,
                        radii: radii.resolve("chain.radii")?,
                    },
                    (None, Some(volumes)) => {
                        let volumes =
                            SizeList::Explicit(volumes.clone()).resolve("chain.volumes")?;
                        ChainSpec::BallVolumes {
                            norm,
                            center,
                            volumes,
                        }
                    }
                    (Some(_), Some(_)) => {
                        return Err(invalid("chain", "give either radii or volumes, not both"))
                    }
                    (None, None) => {
                        return Err(invalid("chain", "needs either radii or volumes"))
                    }
                };
                let chain = build_chain(&spec)?;
                let labels = chain
                    .sets()
                    .iter()
                    .map(|set| match set.shape() {
                        Shape::Ball { radius, .. } => *radius,
                        _ => unreachable!("ball spec built a non-ball"),
                    })
                    .collect();
                Ok((chain, labels))
            }
            ChainConfig::Box {
                half_widths,
                center,
                scales,
            } => {
                let scales = scales.resolve("chain.scales")?;
                let center = resolve_center(center, half_widths.len(), "chain.center")?;
                let chain = build_chain(&ChainSpec::Boxes {
                    center,
                    half_widths: half_widths.clone(),
                    scales: scales.clone(),
                })?;
                Ok((chain, scales))
            }
            ChainConfig::Donut {
                dimension,
                center,
                hole_radius,
                outer_radii,
            } => {
                if *dimension == 0 {
                    return Err(invalid("chain.dimension", "must be at least 1"));
                }
                let outer = outer_radii.resolve("chain.outer_radii")?;
                let center = resolve_center(center, *dimension, "chain.center")?;
                let chain = build_chain(&ChainSpec::Donuts {
                    center,
                    hole_radius: *hole_radius,
                    outer_radii: outer.clone(),
                })?;
                Ok((chain, outer))
            }
            ChainConfig::BoxUnion {
                components,
                center,
                scales,
            } => {
                if components.is_empty() {
                    return Err(invalid("chain.components", "must not be empty"));
                }
                let dimension = components[0].center.len();
                let scales = scales.resolve("chain.scales")?;
                let center = resolve_center(center, dimension, "chain.center")?;
                let chain = build_chain(&ChainSpec::BoxUnions {
                    center,
                    components: components
                        .iter()
                        .map(|c| BoxComponent {
                            center: c.center.clone(),
                            half_widths: c.half_widths.clone(),
                        })
                        .collect(),
                    scales: scales.clone(),
                })?;
                Ok((chain, scales))
            }
        }
    }
}

/// The `[predicate]` table.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredicateConfig {
    InnerBall {
        radius: f64,
    },
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    HurwitzCubic {
        nominal: [f64; 3],
        map_a2: Vec<f64>,
        map_a1: Vec<f64>,
        map_a0: Vec<f64>,
    },
}

impl PredicateConfig {
    pub fn build(&self, dimension: usize) -> Result<Predicate, ConfigError> {
        match self {
            PredicateConfig::InnerBall { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid(
                        "predicate.radius",
                        format!("must be positive, got {radius}"),
                    ));
                }
                Ok(Predicate::InnerBall { radius: *radius })
            }
            PredicateConfig::Halfspace { normal, offset } => {
                if normal.len() != dimension {
                    return Err(invalid(
                        "predicate.normal",
                        format!("has {} entries for dimension {dimension}", normal.len()),
                    ));
                }
                if normal.iter().all(|x| *x == 0.0) {
                    return Err(invalid("predicate.normal", "must not be the zero vector"));
                }
                Ok(Predicate::Halfspace {
                    normal: normal.clone(),
                    offset: *offset,
                })
            }
            PredicateConfig::HurwitzCubic {
                nominal,
                map_a2,
                map_a1,
                map_a0,
            } => {
                for (name, row) in [("map_a2", map_a2), ("map_a1", map_a1), ("map_a0", map_a0)] {
                    if row.len() != dimension {
                        return Err(invalid(
                            &format!("predicate.{name}"),
                            format!("has {} entries for dimension {dimension}", row.len()),
                        ));
                    }
                }
                Ok(Predicate::HurwitzCubic {
                    nominal: *nominal,
                    map: CoefficientMap {
                        rows: [map_a2.clone(), map_a1.clone(), map_a0.clone()],
                    },
                })
            }
        }
    }
}

/// A full experiment description, as read from one TOML file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Samples delivered to every set (`N`).
    pub samples_per_set: usize,
    /// Independent repetitions (`T`).
    pub trials: usize,
    pub seed: u64,
    /// Two-sided confidence level for curve intervals, e.g. `0.99`.
    pub confidence: f64,
    /// Failure budgets for margin reporting; may be empty.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Where output files go; overridable with `--out`.
    pub out_dir: Option<PathBuf>,
    /// Samples per set for `audit`; required by that command only.
    pub audit_samples: Option<usize>,
    pub chain: ChainConfig,
    pub predicate: PredicateConfig,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.samples_per_set == 0 {
            return Err(invalid("samples_per_set", "must be at least 1"));
        }
        if self.trials < 2 {
            return Err(invalid(
                "trials",
                "must be at least 2 (per-set spread is reported across trials)",
            ));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid(
                "confidence",
                format!("must lie strictly between 0 and 1, got {}", self.confidence),
            ));
        }
        for (i, eps) in self.epsilons.iter().enumerate() {
            if !(0.0..1.0).contains(eps) {
                return Err(invalid(
                    &format!("epsilons[{i}]"),
                    format!("must lie in [0, 1), got {eps}"),
                ));
            }
        }
        if let Some(0) = self.audit_samples {
            return Err(invalid("audit_samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// Reads and validates a config file. Parse errors keep toml's line/column
/// diagnostics.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    let config: ExperimentConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_owned(),
        source: Box::new(source),
    })?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nestmc_core::NestingVerification;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|source| ConfigError::Parse {
                path: PathBuf::from("inline"),
                source: Box::new(source),
            })?;
        config.validate()?;
        Ok(config)
    }

    const BASE: &str = r#"
        samples_per_set = 100
        trials = 10
        seed = 42
        confidence = 0.99
        epsilons = [0.05]

        [chain]
        family = "ball"
        norm = 2
        dimension = 3
        radii = [1.0, 2.0]

        [predicate]
        kind = "inner_ball"
        radius = 1.0
    "#;

    #[test]
    fn minimal_config_parses_and_builds() {
        let config = parse(BASE).unwrap();
        let (chain, labels) = config.chain.build().unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(labels, vec![1.0, 2.0]);
        let predicate = config.predicate.build(chain.dimension()).unwrap();
        assert!(predicate.evaluate(&[0.5, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn geometric_radii_expand_to_the_requested_grid() {
        let text = BASE.replace(
            "radii = [1.0, 2.0]",
            "radii = { geometric = { min = 1.0, max = 2.0, count = 50 } }",
        );
        let config = parse(&text).unwrap();
        let (chain, labels) = config.chain.build().unwrap();
        assert_eq!(chain.len(), 50);
        assert!((labels[0] - 1.0).abs() < 1e-12);
        assert!((labels[49] - 2.0).abs() < 1e-12);
        let ratio = labels[1] / labels[0];
        for i in 1..50 {
            assert!((labels[i] / labels[i - 1] - ratio).abs() < 1e-9);
        }
    }

    #[test]
    fn volumes_flavor_computes_radii_labels() {
        let text = BASE.replace("radii = [1.0, 2.0]", "volumes = [1.0, 2.0, 4.0]");
        let config = parse(&text).unwrap();
        let (chain, labels) = config.chain.build().unwrap();
        assert_eq!(chain.len(), 3);
        for (set, want) in chain.sets().iter().zip([1.0, 2.0, 4.0]) {
            assert!((set.volume() - want).abs() < 1e-9);
        }
        assert!(labels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn radii_and_volumes_together_are_rejected() {
        let text = BASE.replace(
            "radii = [1.0, 2.0]",
            "radii = [1.0, 2.0]\nvolumes = [1.0, 2.0]",
        );
        let config = parse(&text).unwrap();
        let err = config.chain.build().unwrap_err();
        assert!(err.to_string().contains("not both"));
    }

    #[test]
    fn non_increasing_radii_are_rejected() {
        let text = BASE.replace("radii = [1.0, 2.0]", "radii = [1.0, 1.0]");
        let config = parse(&text).unwrap();
        let err = config.chain.build().unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        // Prepended so the key stays top-level instead of joining the last
        // TOML table; typos inside [chain]/[predicate] cannot be caught this
        // way because tagged enums accept unknown fields.
        let text = format!("sample_count = 5\n{BASE}");
        assert!(matches!(parse(&text), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn bad_scalar_ranges_are_rejected_with_field_names() {
        for (needle, replacement, field) in [
            ("samples_per_set = 100", "samples_per_set = 0", "samples_per_set"),
            ("trials = 10", "trials = 1", "trials"),
            ("confidence = 0.99", "confidence = 1.5", "confidence"),
            ("epsilons = [0.05]", "epsilons = [1.0]", "epsilons[0]"),
        ] {
            let text = BASE.replace(needle, replacement);
            let err = parse(&text).unwrap_err();
            assert!(
                err.to_string().contains(field),
                "expected {field} in: {err}"
            );
        }
    }

    #[test]
    fn norm_accepts_integers_and_inf_string() {
        for (norm, ok) in [
            ("norm = 1", true),
            ("norm = 2", true),
            ("norm = \"inf\"", true),
            ("norm = 3", false),
            ("norm = \"euclid\"", false),
        ] {
            let text = BASE.replace("norm = 2", norm);
            let config = parse(&text).unwrap();
            assert_eq!(config.chain.build().is_ok(), ok, "{norm}");
        }
    }

    #[test]
    fn donut_and_union_families_build() {
        let donut = r#"
            samples_per_set = 10
            trials = 2
            seed = 1
            confidence = 0.9

            [chain]
            family = "donut"
            dimension = 2
            hole_radius = 1.0
            outer_radii = [1.5, 2.0]

            [predicate]
            kind = "inner_ball"
            radius = 1.5
        "#;
        let config = parse(donut).unwrap();
        let (chain, labels) = config.chain.build().unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(labels, vec![1.5, 2.0]);

        let union = r#"
            samples_per_set = 10
            trials = 2
            seed = 1
            confidence = 0.9

            [chain]
            family = "box_union"
            scales = [1.0, 2.0]
            components = [
                { center = [-3.0, 0.0], half_widths = [1.0, 1.0] },
                { center = [3.0, 0.0], half_widths = [1.0, 1.0] },
            ]

            [predicate]
            kind = "halfspace"
            normal = [1.0, 0.0]
            offset = 0.0
        "#;
        let config = parse(union).unwrap();
        let (chain, labels) = config.chain.build().unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(labels, vec![1.0, 2.0]);
        let predicate = config.predicate.build(chain.dimension()).unwrap();
        assert!(predicate.evaluate(&[-3.0, 0.0]).unwrap());
    }

    #[test]
    fn predicate_dimension_mismatches_are_rejected() {
        let text = BASE.replace(
            "kind = \"inner_ball\"\n        radius = 1.0",
            "kind = \"halfspace\"\n        normal = [1.0, 0.0]\n        offset = 0.0",
        );
        let config = parse(&text).unwrap();
        let err = config.predicate.build(3).unwrap_err();
        assert!(err.to_string().contains("predicate.normal"));
    }

    #[test]
    fn hurwitz_predicate_builds_with_row_maps() {
        let text = BASE.replace(
            "kind = \"inner_ball\"\n        radius = 1.0",
            concat!(
                "kind = \"hurwitz_cubic\"\n",
                "        nominal = [3.0, 3.0, 1.0]\n",
                "        map_a2 = [1.0, 0.0, 0.0]\n",
                "        map_a1 = [0.0, 1.0, 0.0]\n",
                "        map_a0 = [0.0, 0.0, 1.0]",
            ),
        );
        let config = parse(&text).unwrap();
        let predicate = config.predicate.build(3).unwrap();
        assert!(predicate.evaluate(&[0.0, 0.0, 0.0]).unwrap());
        assert!(!predicate.evaluate(&[0.0, 0.0, 10.0]).unwrap());
    }

    #[test]
    fn zero_audit_samples_is_rejected() {
        let text = format!("audit_samples = 0\n{BASE}");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("audit_samples"));
    }

    #[test]
    fn per_set_norms_build_a_statistical_chain() {
        let text = BASE.replace(
            "norm = 2",
            "norms = [2, \"inf\"]",
        );
        let config = parse(&text).unwrap();
        let (chain, labels) = config.chain.build().unwrap();
        assert_eq!(labels, vec![1.0, 2.0]);
        // The unit 2-ball provably fits in the inf-ball of radius 2, so the
        // chain stays analytic; shrink the outer radius past the embedding
        // constant and the proof gives up.
        assert_eq!(chain.verification(), NestingVerification::Analytic);

        let tight = BASE
            .replace("norm = 2", "norms = [\"inf\", 2]")
            .replace("radii = [1.0, 2.0]", "radii = [1.0, 1.69]");
        let config = parse(&tight).unwrap();
        let (chain, _) = config.chain.build().unwrap();
        assert_eq!(chain.verification(), NestingVerification::Statistical);
    }

    #[test]
    fn per_set_norms_exclude_single_norm_and_volumes() {
        let text = BASE.replace("norm = 2", "norm = 2\n        norms = [2, 2]");
        let err = parse(&text).unwrap().chain.build().unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");

        let text = BASE.replace("norm = 2", "norms = [2, 2, 2]");
        let err = parse(&text).unwrap().chain.build().unwrap_err();
        assert!(err.to_string().contains("3 entries for 2 radii"), "{err}");
    }
}
