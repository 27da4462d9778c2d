//! CSV output files. Every file opens with `#`-prefixed metadata lines
//! (tool version, command, seed, generator, config hash) so a result file
//! is attributable on its own; the data follows as plain RFC-4180 CSV.
//!
//! Nothing here depends on time or environment: the same config and seed
//! produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nestmc_core::{AuditReport, CostReport, Margin, MarginBasis, RobustnessCurve, GENERATOR_NAME};

use crate::CliError;

/// Shared provenance block at the top of every output file.
pub struct Meta<'a> {
    pub command: &'a str,
    pub config_path: &'a Path,
    pub config_sha256: &'a str,
    pub seed: u64,
    pub trials: usize,
    pub samples_per_set: usize,
}

impl Meta<'_> {
    fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# tool: nestmc {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# config: {}", self.config_path.display())?;
        writeln!(w, "# config_sha256: {}", self.config_sha256)?;
        writeln!(w, "# generator: {GENERATOR_NAME}")?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# trials: {}", self.trials)?;
        writeln!(w, "# samples_per_set: {}", self.samples_per_set)?;
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_owned(),
        source: Box::new(source),
    }
}

/// Writes `curve.csv`: one row per set with counts, estimate, and interval;
/// margin answers for each requested epsilon sit in the header.
pub fn write_curve(
    dir: &Path,
    meta: &Meta<'_>,
    curve: &RobustnessCurve,
    margins: &[(f64, Margin, Margin)],
) -> Result<PathBuf, CliError> {
    let path = dir.join("curve.csv");
    let mut w = open(&path)?;
    meta.write(&mut w).map_err(io_err(&path))?;
    writeln!(w, "# confidence: {}", curve.confidence).map_err(io_err(&path))?;
    for (epsilon, point, conservative) in margins {
        writeln!(
            w,
            "# margin eps={epsilon}: point_estimate={} ci_lower_bound={}",
            margin_text(point),
            margin_text(conservative),
        )
        .map_err(io_err(&path))?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["index", "radius", "k", "n", "estimate", "ci_lo", "ci_hi"])
        .map_err(csv_err(&path))?;
    for (index, point) in curve.points.iter().enumerate() {
        csv.write_record([
            (index + 1).to_string(),
            point.radius.to_string(),
            point.successes.to_string(),
            point.trials.to_string(),
            point.estimate.to_string(),
            point.ci_lo.to_string(),
            point.ci_hi.to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    csv.flush().map_err(io_err(&path))?;
    Ok(path)
}

fn margin_text(margin: &Margin) -> String {
    match margin {
        Margin::AtRadius(radius) => format!("radius {radius}"),
        Margin::BelowGrid => "below_grid".to_owned(),
    }
}

/// The margin pair (point-estimate and conservative reading) for one
/// epsilon.
pub fn margin_pair(
    curve: &RobustnessCurve,
    epsilon: f64,
) -> Result<(f64, Margin, Margin), CliError> {
    let point = nestmc_core::margin(curve, epsilon)?;
    let conservative = nestmc_core::margin_with(curve, epsilon, MarginBasis::CiLowerBound)?;
    Ok((epsilon, point, conservative))
}

/// Writes `cost.csv`: measured fresh-draw cost per set against the closed
/// form, a totals row, and the bounds in the header.
pub fn write_cost(dir: &Path, meta: &Meta<'_>, report: &CostReport) -> Result<PathBuf, CliError> {
    let path = dir.join("cost.csv");
    let mut w = open(&path)?;
    meta.write(&mut w).map_err(io_err(&path))?;
    writeln!(w, "# theorem_bound: {}", report.theorem_bound).map_err(io_err(&path))?;
    match report.corollary_bound {
        Some(bound) => writeln!(w, "# corollary_bound: {bound}"),
        None => writeln!(w, "# corollary_bound: n/a"),
    }
    .map_err(io_err(&path))?;
    writeln!(w, "# expected_total: {}", report.expected_total).map_err(io_err(&path))?;
    writeln!(w, "# truncated_trials: {}", report.truncated_trials).map_err(io_err(&path))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["set_index", "expected_fresh", "mean_fresh", "stderr", "z"])
        .map_err(csv_err(&path))?;
    for (index, set) in report.per_set.iter().enumerate() {
        csv.write_record([
            (index + 1).to_string(),
            set.expected.to_string(),
            set.mean.to_string(),
            set.stderr.to_string(),
            z_text(set.z, set.exact_match()),
        ])
        .map_err(csv_err(&path))?;
    }
    csv.write_record([
        "total".to_owned(),
        report.expected_total.to_string(),
        report.total_mean.to_string(),
        report.total_stderr.to_string(),
        z_text(
            report.total_z,
            report.total_stderr == 0.0 && report.total_mean == report.expected_total,
        ),
    ])
    .map_err(csv_err(&path))?;
    csv.flush().map_err(io_err(&path))?;
    Ok(path)
}

fn z_text(z: Option<f64>, exact: bool) -> String {
    match z {
        Some(z) => z.to_string(),
        None if exact => "exact".to_owned(),
        None => "undefined".to_owned(),
    }
}

/// One benchmark trial's counts.
pub struct BenchRow {
    pub trial: u64,
    pub reuse_fresh: u64,
    pub reuse_evals: u64,
    pub naive_fresh: u64,
    pub naive_evals: u64,
}

/// Writes `bench.csv`: per-trial fresh-draw and predicate-evaluation counts
/// for both schedules plus the measured cost ratio; the analytic ratio and
/// ratio statistics sit in the header. Timing is reported on stdout, not
/// here, so the file stays reproducible byte for byte.
pub fn write_bench(
    dir: &Path,
    meta: &Meta<'_>,
    analytic_ratio: f64,
    ratio_mean: f64,
    ratio_stderr: f64,
    rows: &[BenchRow],
) -> Result<PathBuf, CliError> {
    let path = dir.join("bench.csv");
    let mut w = open(&path)?;
    meta.write(&mut w).map_err(io_err(&path))?;
    writeln!(w, "# analytic_ratio: {analytic_ratio}").map_err(io_err(&path))?;
    writeln!(w, "# ratio_mean: {ratio_mean}").map_err(io_err(&path))?;
    writeln!(w, "# ratio_stderr: {ratio_stderr}").map_err(io_err(&path))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "trial",
        "reuse_fresh",
        "reuse_evals",
        "naive_fresh",
        "naive_evals",
        "cost_ratio",
    ])
    .map_err(csv_err(&path))?;
    for row in rows {
        csv.write_record([
            row.trial.to_string(),
            row.reuse_fresh.to_string(),
            row.reuse_evals.to_string(),
            row.naive_fresh.to_string(),
            row.naive_evals.to_string(),
            (row.reuse_fresh as f64 / row.naive_fresh as f64).to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    csv.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `audit.csv`: one row per sampled nestedness violation.
pub fn write_audit(dir: &Path, meta: &Meta<'_>, report: &AuditReport) -> Result<PathBuf, CliError> {
    let path = dir.join("audit.csv");
    let mut w = open(&path)?;
    meta.write(&mut w).map_err(io_err(&path))?;
    writeln!(w, "# sets_checked: {}", report.sets_checked).map_err(io_err(&path))?;
    writeln!(w, "# audit_samples: {}", report.samples_per_set).map_err(io_err(&path))?;
    writeln!(w, "# violations: {}", report.violations.len()).map_err(io_err(&path))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["source_index", "failing_index", "point"])
        .map_err(csv_err(&path))?;
    for violation in &report.violations {
        let point = violation
            .point
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        csv.write_record([
            (violation.source_index + 1).to_string(),
            (violation.failing_index + 1).to_string(),
            point,
        ])
        .map_err(csv_err(&path))?;
    }
    csv.flush().map_err(io_err(&path))?;
    Ok(path)
}
