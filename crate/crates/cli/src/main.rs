//! Command-line front end: load an experiment file, apply flag overrides,
//! run the scheme × load sweep, and emit the CSV. Data goes to the output
//! stream only; diagnostics go to stderr.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bandsim::config::{load_config, parse_config};
use bandsim::model::Scheme;
use bandsim::sweep::run_sweep;
use bandsim::Error;

#[derive(Parser)]
#[command(
    name = "bandsim",
    version,
    about = "Single-cell bandwidth allocation simulator: sweeps admission \
             schemes across offered loads and emits a CSV comparison table"
)]
struct Args {
    /// Flat `key = value` experiment file; omitted keys take built-in defaults
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Scheme to run (`proposed` or `fixed:<kbps>`); repeatable, replaces the
    /// config's scheme list
    #[arg(long = "scheme", value_name = "NAME")]
    schemes: Vec<String>,

    /// Comma-separated total new-call arrival rates, replaces the config's
    /// rate grid
    #[arg(long, value_name = "LIST")]
    lambda: Option<String>,

    /// Replications per (scheme, rate) cell
    #[arg(long, value_name = "N")]
    replications: Option<usize>,

    /// Base seed for the replication seed blocks
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Where the CSV goes: a file path, or `stdout`
    #[arg(long, value_name = "PATH|stdout", default_value = "stdout")]
    out: String,
}

fn execute(args: &Args) -> Result<(), Error> {
    let (mut config, rates, mut sweep) = match &args.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };

    if !args.schemes.is_empty() {
        sweep.schemes = args
            .schemes
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<_, _>>()?;
        config.scheme = sweep.schemes[0];
    }
    if let Some(list) = &args.lambda {
        sweep.lambda_values = list
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("sweep.lambda", format!("`{x}` is not a number")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(n) = args.replications {
        sweep.replications = n;
    }
    if let Some(s) = args.seed {
        sweep.base_seed = s;
    }
    config.validate()?;
    sweep.validate()?;

    let csv = run_sweep(&config, &rates, &sweep, true)?;
    if args.out == "stdout" {
        print!("{csv}");
    } else {
        fs::write(&args.out, &csv)
            .map_err(|e| Error::config("out", format!("cannot write {}: {e}", args.out)))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bandsim: {err}");
            match err {
                // Faulty user input: bad keys, bad values, violated
                // invariants, infeasible cells.
                Error::Config { .. } | Error::InfeasibleMbsFloor { .. } => ExitCode::from(1),
                // Anything else escaping to here is an internal fault.
                _ => ExitCode::from(2),
            }
        }
    }
}
