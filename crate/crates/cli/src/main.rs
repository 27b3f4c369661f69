use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use volterra_lab::{catalogue_listing, exit, run_experiment, CliError, ExperimentConfig, Mode};

/// Runs one experiment described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "volterra-lab", version)]
struct Args {
    /// Experiment mode; must match the config's `mode` when both are set.
    #[arg(value_enum, required_unless_present = "list_catalogue")]
    mode: Option<Mode>,
    /// Path to the JSON experiment config.
    #[arg(long, required_unless_present = "list_catalogue")]
    config: Option<PathBuf>,
    /// Seed for the forcing generator; replaces the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and series CSVs.
    #[arg(long, env = "VOLTERRA_LAB_OUT")]
    out: Option<PathBuf>,
    /// Print the kernel, forcing and scaling catalogues and exit.
    #[arg(long)]
    list_catalogue: bool,
}

fn execute(args: Args) -> Result<i32, CliError> {
    if args.list_catalogue {
        print!("{}", catalogue_listing());
        return Ok(exit::PASSED);
    }
    let path = args.config.expect("clap enforces --config");
    let mut config = ExperimentConfig::from_file(&path)?;
    let mode = args.mode.expect("clap enforces the mode");
    match config.mode {
        Some(m) if m != mode => {
            return Err(CliError::Usage(format!(
                "command line asks for `{mode}` but the config declares `{m}`"
            )))
        }
        _ => config.mode = Some(mode),
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.outputs.dir = Some(out);
    }
    let report = run_experiment(&config)?;
    println!("{}", report.to_json());
    let failed = report.failed_checks();
    if failed.is_empty() {
        Ok(exit::PASSED)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(exit::CHECK_FAILED)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match execute(Args::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::ERROR
        }
    };
    ExitCode::from(code as u8)
}
