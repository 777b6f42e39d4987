//! `hardy-means` command-line tool.
//!
//! Every subcommand prints JSON (or CSV for `sweep`, a bare number for
//! `mean`) on stdout. Exit codes: 0 success, 2 invalid input or failed
//! validation, 3 solver or consistency error, 4 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hardy_means::envelope::concave_envelope;
use hardy_means::hardy::{hardy, RouteChoice};
use hardy_means::harness::{
    hardy_ratio, read_column, rows_to_csv, sweep, SequenceKind, SequenceSpec, SweepConfig,
};
use hardy_means::mean::{check_mean_axioms, mean_generic, MeanRequest};
use hardy_means::presets::parse_generator;
use hardy_means::validate::{
    all_passed, check_lhqd, default_grid, validate_phi, validate_script_f,
};
use hardy_means::{Error, Result};
use serde::Serialize;

const DEFAULT_SEED: u64 = 42;
const SEED_VAR: &str = "HARDY_MEANS_SEED";

#[derive(Parser)]
#[command(name = "hardy-means", version)]
#[command(about = "Quasideviation means, concave envelopes and Hardy constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean of a data vector
    Mean {
        /// Preset (log, power:<p>, truncated:<M>, g_dip, g_l), JSON, or @file
        #[arg(short, long)]
        generator: String,
        /// Comma separated values, or a single-column CSV file
        #[arg(short, long)]
        data: String,
    },
    /// Concave envelope parameters as JSON
    Envelope {
        #[arg(short, long)]
        generator: String,
    },
    /// Hardy constant report as JSON
    Hardy {
        #[arg(short, long)]
        generator: String,
        #[arg(long, value_enum, default_value_t = Route::Auto)]
        route: Route,
        /// Include bracketing history and quadrature panels
        #[arg(long)]
        trace: bool,
    },
    /// Grid certificates for a generator class
    Validate {
        #[arg(short, long)]
        generator: String,
        #[arg(long, value_enum, default_value_t = Class::Phi)]
        class: Class,
        /// Exponent for the lhqd check
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p: f64,
    },
    /// Empirical Hardy ratio over a sequence prefix
    Ratio {
        #[arg(short, long)]
        generator: String,
        /// geometric:<r>, power_decay:<s>, constant, or csv:<path>
        #[arg(short, long)]
        sequence: String,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Generator × sequence grid of empirical ratios as CSV
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Randomized check of internality, homogeneity and monotonicity
    Axioms {
        #[arg(short, long)]
        generator: String,
        #[arg(short, long, default_value = "1")]
        data: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Auto,
    Concave,
    Truncated,
    Envelope,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    F,
    Phi,
    Lhqd,
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Error::Io(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    emit(&format!("{text}\n"))
}

fn parse_data(arg: &str) -> Result<Vec<f64>> {
    if Path::new(arg).is_file() {
        return read_column(Path::new(arg));
    }
    arg.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| Error::Parse(format!("data entry '{s}': {e}")))
        })
        .collect()
}

fn seed() -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("{SEED_VAR}='{s}': {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn domination_error(what: &str) -> Error {
    Error::Consistency(format!(
        "{what}: empirical ratio exceeds the theoretical constant"
    ))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Mean { generator, data } => {
            let req = MeanRequest::new(parse_generator(&generator)?, parse_data(&data)?)?;
            emit(&format!("{}\n", mean_generic(&req)?))?;
        }
        Command::Envelope { generator } => {
            print_json(&concave_envelope(&parse_generator(&generator)?)?)?
        }
        Command::Hardy {
            generator,
            route,
            trace,
        } => {
            let choice = match route {
                Route::Auto => RouteChoice::Auto,
                Route::Concave => RouteChoice::Concave,
                Route::Truncated => RouteChoice::Truncated,
                Route::Envelope => RouteChoice::Envelope,
            };
            print_json(&hardy(&parse_generator(&generator)?, choice, trace)?)?;
        }
        Command::Validate {
            generator,
            class,
            p,
        } => {
            let g = parse_generator(&generator)?;
            let grid = default_grid();
            let reports = match class {
                Class::F => validate_script_f(&g, &grid)?,
                Class::Phi => validate_phi(&g, &grid)?,
                Class::Lhqd => vec![check_lhqd(&g, p, &grid)?],
            };
            print_json(&reports)?;
            if !all_passed(&reports) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Ratio {
            generator,
            sequence,
            n,
            scale,
        } => {
            let seq = SequenceSpec::new(SequenceKind::parse(&sequence)?, n, scale)?;
            let report = hardy_ratio(&parse_generator(&generator)?, &seq)?;
            print_json(&report)?;
            if !report.dominated {
                return Err(domination_error(&sequence));
            }
        }
        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let rows = sweep(&SweepConfig::from_json(&text)?);
            let csv = rows_to_csv(&rows)?;
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                None => emit(&csv)?,
            }
            if let Some(r) = rows.iter().find(|r| r.dominated == Some(false)) {
                return Err(domination_error(&format!(
                    "{} × {}",
                    r.generator, r.sequence
                )));
            }
        }
        Command::Axioms {
            generator,
            data,
            trials,
        } => {
            let req = MeanRequest::new(parse_generator(&generator)?, parse_data(&data)?)?;
            let report = check_mean_axioms(&req, trials, seed()?)?;
            print_json(&report)?;
            if !report.passed {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
