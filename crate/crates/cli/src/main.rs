use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nestmc_cli::{cmd_audit, cmd_bench, cmd_run, Invocation};

/// Monte Carlo estimation over nested uncertainty sets with sample reuse.
#[derive(Parser)]
#[command(name = "nestmc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the robustness curve and compare sampling cost to the
    /// closed-form expectation.
    Run(CommonArgs),
    /// Time reuse against independent per-set sampling on the same problem.
    Bench(CommonArgs),
    /// Randomly probe the chain for containment violations.
    Audit(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment description (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count from the config file.
    #[arg(long)]
    trials: Option<usize>,
    /// Directory for output files (default: config's out_dir, then ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the stdout summary; files are still written.
    #[arg(long, short)]
    quiet: bool,
}

impl CommonArgs {
    fn into_invocation(self) -> Invocation {
        Invocation {
            config_path: self.config,
            seed: self.seed,
            trials: self.trials,
            out: self.out,
            quiet: self.quiet,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args.into_invocation()),
        Command::Bench(args) => cmd_bench(&args.into_invocation()),
        Command::Audit(args) => cmd_audit(&args.into_invocation()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
