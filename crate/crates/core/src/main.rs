use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainbench::harness::{emit_csv, parse_config, run_experiment, verify, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "chainbench", version, about = "Contextual online learning benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its regret traces as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Run the same experiment at several horizons, one CSV per horizon.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in property checks.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

const CONFIG_ERROR: u8 = 1;
const PROPERTY_FAILURE: u8 = 2;
const IO_ERROR: u8 = 3;

fn load(path: &Path) -> Result<ExperimentConfig, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: reading {}: {e}", path.display());
        IO_ERROR
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        CONFIG_ERROR
    })
}

fn run_to(config: &ExperimentConfig, out: &Path) -> Result<(), u8> {
    let result = run_experiment(config).map_err(|e: RunError| {
        eprintln!("error: {e}");
        if e.is_property_failure() {
            PROPERTY_FAILURE
        } else {
            CONFIG_ERROR
        }
    })?;
    emit_csv(&result.traces, out).map_err(|e| {
        eprintln!("error: {e}");
        IO_ERROR
    })?;
    println!(
        "{} T={} replicates={} mean regret {:.4} (comparator {:.4}, slack {:.4}) -> {}",
        config.algorithm,
        config.horizon,
        config.replicates,
        result.mean_final_regret(),
        result.comparator.total,
        result.comparator.slack,
        out.display()
    );
    Ok(())
}

fn execute(cli: Cli) -> Result<(), u8> {
    match cli.command {
        Command::Run { config, out, seed, replicates } => {
            let mut c = load(&config)?;
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(r) = replicates {
                c.replicates = r;
            }
            run_to(&c, &out)
        }
        Command::Sweep { config, horizons, out } => {
            let c = load(&config)?;
            fs::create_dir_all(&out).map_err(|e| {
                eprintln!("error: creating {}: {e}", out.display());
                IO_ERROR
            })?;
            for h in horizons {
                if h == 0 {
                    eprintln!("error: horizons must be positive");
                    return Err(CONFIG_ERROR);
                }
                run_to(&c.with_horizon(h), &out.join(format!("regret_T{h}.csv")))?;
            }
            Ok(())
        }
        Command::Verify { seed } => {
            let outcomes = verify::run_checks(seed);
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "ok  " } else { "FAIL" }, o.name, o.detail);
            }
            if outcomes.iter().all(|o| o.passed) {
                Ok(())
            } else {
                Err(PROPERTY_FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
