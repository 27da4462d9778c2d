//! The three commands behind the binary: estimation runs, reuse-versus-naive
//! benchmarks, and nestedness audits.

use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use nestmc_core::stats::mean_stderr;
use nestmc_core::{
    audit_nestedness, curve_from_counts, expected_fresh, make_stream, naive_run, run,
    trial_statistics, NestedChain, NestingVerification, Predicate, Purpose, ReuseLedger,
};

use crate::config::{load_config, ExperimentConfig};
use crate::output::{self, BenchRow, Meta};
use crate::CliError;

/// One parsed invocation: the config file plus command-line overrides.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config_path: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

struct Prepared {
    config: ExperimentConfig,
    chain: NestedChain,
    labels: Vec<f64>,
    predicate: Predicate,
    out_dir: PathBuf,
    config_sha256: String,
}

fn prepare(invocation: &Invocation) -> Result<Prepared, CliError> {
    let mut config = load_config(&invocation.config_path)?;
    if let Some(seed) = invocation.seed {
        config.seed = seed;
    }
    if let Some(trials) = invocation.trials {
        config.trials = trials;
    }
    if let Some(out) = &invocation.out {
        config.out_dir = Some(out.clone());
    }
    let (chain, labels) = config.chain.build()?;
    let predicate = config.predicate.build(chain.dimension())?;
    let out_dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let bytes = std::fs::read(&invocation.config_path).map_err(|source| CliError::Io {
        path: invocation.config_path.clone(),
        source,
    })?;
    let config_sha256 = hex(&Sha256::digest(&bytes));
    Ok(Prepared {
        config,
        chain,
        labels,
        predicate,
        out_dir,
        config_sha256,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn meta<'a>(prepared: &'a Prepared, invocation: &'a Invocation, command: &'a str) -> Meta<'a> {
    Meta {
        command,
        config_path: &invocation.config_path,
        config_sha256: &prepared.config_sha256,
        seed: prepared.config.seed,
        trials: prepared.config.trials,
        samples_per_set: prepared.config.samples_per_set,
    }
}

/// Runs the estimation experiment: `trials` independent reuse runs, pooled
/// into a robustness curve (`curve.csv`) and a cost comparison against the
/// closed-form expectations (`cost.csv`).
pub fn cmd_run(invocation: &Invocation) -> Result<(), CliError> {
    let prepared = prepare(invocation)?;
    let config = &prepared.config;
    let n = config.samples_per_set;

    let per_trial: Vec<(ReuseLedger, Vec<u64>)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = make_stream(config.seed, trial, Purpose::Engine);
            let out = run(&prepared.chain, n, &prepared.predicate, &mut rng)?;
            let successes = out.success_counts();
            Ok((out.ledger, successes))
        })
        .collect::<Result<_, CliError>>()?;

    let m = prepared.chain.len();
    let mut counts = vec![(0_u64, 0_u64); m];
    for (_, successes) in &per_trial {
        for (slot, k) in counts.iter_mut().zip(successes) {
            slot.0 += k;
            slot.1 += n as u64;
        }
    }
    let curve = curve_from_counts(&counts, &prepared.labels, config.confidence)?;
    let margins = config
        .epsilons
        .iter()
        .map(|&epsilon| output::margin_pair(&curve, epsilon))
        .collect::<Result<Vec<_>, _>>()?;

    let ledgers: Vec<ReuseLedger> = per_trial.into_iter().map(|(ledger, _)| ledger).collect();
    let report = trial_statistics(&ledgers, &prepared.chain)?;

    let meta = meta(&prepared, invocation, "run");
    let curve_path = output::write_curve(&prepared.out_dir, &meta, &curve, &margins)?;
    let cost_path = output::write_cost(&prepared.out_dir, &meta, &report)?;

    if !invocation.quiet {
        announce_verification(&prepared.chain);
        println!(
            "ran {} trials of {} sets, {} samples per set",
            config.trials, m, n
        );
        println!(
            "mean fresh draws {:.2} (expected {:.2}, bound {:.2})",
            report.total_mean, report.expected_total, report.theorem_bound
        );
        for (epsilon, point, conservative) in &margins {
            println!(
                "margin eps={epsilon}: point_estimate={}, ci_lower_bound={}",
                margin_brief(point),
                margin_brief(conservative)
            );
        }
        println!("wrote {} and {}", curve_path.display(), cost_path.display());
    }
    Ok(())
}

fn margin_brief(margin: &nestmc_core::Margin) -> String {
    match margin {
        nestmc_core::Margin::AtRadius(radius) => format!("{radius}"),
        nestmc_core::Margin::BelowGrid => "below_grid".to_owned(),
    }
}

fn announce_verification(chain: &NestedChain) {
    if chain.verification() == NestingVerification::Statistical {
        eprintln!("note: chain nestedness was not proved analytically; consider `nestmc audit`");
    }
}

/// Runs reuse and naive schedules side by side on the same experiment and
/// writes the per-trial cost comparison (`bench.csv`). Wall time goes to
/// stdout; the file carries only reproducible counts.
pub fn cmd_bench(invocation: &Invocation) -> Result<(), CliError> {
    let prepared = prepare(invocation)?;
    let config = &prepared.config;
    let n = config.samples_per_set;

    let reuse_start = Instant::now();
    let reuse: Vec<(u64, u64)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let (predicate, evals) = prepared.predicate.clone().counting();
            let mut rng = make_stream(config.seed, trial, Purpose::Engine);
            let out = run(&prepared.chain, n, &predicate, &mut rng)?;
            Ok((out.ledger.total_fresh(), evals.load(Ordering::Relaxed)))
        })
        .collect::<Result<_, CliError>>()?;
    let reuse_elapsed = reuse_start.elapsed();

    let naive_start = Instant::now();
    let naive: Vec<(u64, u64)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let (predicate, evals) = prepared.predicate.clone().counting();
            let mut rng = make_stream(config.seed, trial, Purpose::Naive);
            let out = naive_run(&prepared.chain, n, &predicate, &mut rng)?;
            Ok((out.ledger.total_fresh(), evals.load(Ordering::Relaxed)))
        })
        .collect::<Result<_, CliError>>()?;
    let naive_elapsed = naive_start.elapsed();

    let rows: Vec<BenchRow> = reuse
        .iter()
        .zip(&naive)
        .enumerate()
        .map(|(trial, (&(reuse_fresh, reuse_evals), &(naive_fresh, naive_evals)))| BenchRow {
            trial: trial as u64,
            reuse_fresh,
            reuse_evals,
            naive_fresh,
            naive_evals,
        })
        .collect();

    let ratios: Vec<f64> = rows
        .iter()
        .map(|row| row.reuse_fresh as f64 / row.naive_fresh as f64)
        .collect();
    let (ratio_mean, ratio_stderr) = mean_stderr(&ratios);
    let expected: f64 = expected_fresh(&prepared.chain, n).iter().sum();
    let analytic_ratio = expected / (n * prepared.chain.len()) as f64;

    let meta = meta(&prepared, invocation, "bench");
    let path = output::write_bench(
        &prepared.out_dir,
        &meta,
        analytic_ratio,
        ratio_mean,
        ratio_stderr,
        &rows,
    )?;

    if !invocation.quiet {
        announce_verification(&prepared.chain);
        println!(
            "reuse:  {:>10.3} ms total ({} trials)",
            reuse_elapsed.as_secs_f64() * 1e3,
            config.trials
        );
        println!(
            "naive:  {:>10.3} ms total ({} trials)",
            naive_elapsed.as_secs_f64() * 1e3,
            config.trials
        );
        println!(
            "cost ratio {:.4} +- {:.4} (analytic {:.4})",
            ratio_mean, ratio_stderr, analytic_ratio
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Samples every set and checks containment in all larger sets, writing
/// violations to `audit.csv`. Exits nonzero when violations were found.
pub fn cmd_audit(invocation: &Invocation) -> Result<(), CliError> {
    let prepared = prepare(invocation)?;
    let config = &prepared.config;
    let samples = config.audit_samples.ok_or(CliError::Config(
        crate::config::ConfigError::Invalid {
            field: "audit_samples".to_owned(),
            message: "required by the audit command".to_owned(),
        },
    ))?;

    let mut rng = make_stream(config.seed, 0, Purpose::Audit);
    let report = audit_nestedness(&prepared.chain, samples, &mut rng)?;

    let meta = meta(&prepared, invocation, "audit");
    let path = output::write_audit(&prepared.out_dir, &meta, &report)?;

    if !invocation.quiet {
        println!(
            "audited {} sets with {} samples each: {} violations",
            report.sets_checked,
            report.samples_per_set,
            report.violations.len()
        );
        println!("wrote {}", path.display());
    }
    if !report.passed() {
        return Err(CliError::AuditFailed {
            violations: report.violations.len(),
            path,
        });
    }
    Ok(())
}

