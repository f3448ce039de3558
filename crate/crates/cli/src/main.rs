use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qreverse_cli::{
    catalog, enumeration_cap, load, run, CliError, Format, RunOptions, ENUM_CAP_VAR,
};

#[derive(Parser)]
#[command(
    name = "qreverse",
    version,
    about = "Time-reversal checks for repeated quantum measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name).
    Run {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Override the scenario's primary tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long, default_value_t = qreverse_cli::run::DEFAULT_WORKERS)]
        workers: usize,
    },
    /// List bundled scenarios.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for b in catalog::CATALOG {
                println!("{:<16} {}", b.name, b.topic);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            seed,
            samples,
            tol,
            out,
            format,
            workers,
        } => {
            let format = match format {
                OutputFormat::Csv => Format::Csv,
                OutputFormat::Json => Format::Json,
            };
            match execute(&scenario, seed, samples, tol, out, format, workers) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn execute(
    scenario: &str,
    seed: Option<u64>,
    samples: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Format,
    workers: usize,
) -> Result<bool, CliError> {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    let mut opts = RunOptions {
        seed,
        samples,
        tol,
        workers,
        ..RunOptions::default()
    };
    if let Some(cap) = enumeration_cap(std::env::var(ENUM_CAP_VAR).ok().as_deref())? {
        opts.enumeration_cap = cap;
    }
    let (name, parsed) = load(scenario)?;
    let report = run(&name, &parsed, &opts)?;
    match out {
        Some(dir) => {
            for file in report.write_to(&dir, format)? {
                eprintln!("wrote {}", dir.join(file).display());
            }
        }
        None => match format {
            Format::Json => print!("{}", report.to_json()),
            Format::Csv => print!("{}", report.to_csv()),
        },
    }
    for c in &report.checks {
        eprintln!("{c}");
    }
    Ok(report.passed())
}
