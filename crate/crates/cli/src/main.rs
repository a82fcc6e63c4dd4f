//! `lattice`: run, simulate and validate experiment configurations.
//!
//! Exit codes: 0 all reports pass, 1 a report fails, 2 configuration error,
//! 3 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lattice_core::experiment::{
    parse_suite, reports_csv, reports_json, run_suite, simulate, write_reports, ExperimentConfig, ExperimentKind,
    Outcome, OutputFormat, Suite,
};
use lattice_core::stochastic_lattice::write_atomic;
use lattice_core::verification::TestReport;
use lattice_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "lattice", version, about = "Invariant measures of integrable lattice maps: experiments and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a configuration or suite.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write all reports to this file instead of the per-experiment targets.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format; overrides `output.format`.
        #[arg(long, value_parser = ["json", "csv"])]
        format: Option<String>,
        /// Worker threads; the LATTICE_THREADS variable takes precedence.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evolve the initial row of `simulate` experiments and write the field as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure with its exit code.
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Exit(code, e.to_string())
    }
}

fn load(path: &Path) -> Result<Suite, Exit> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Exit(EXIT_CONFIG, format!("cannot read config {}: {e}", path.display())))?;
    Ok(parse_suite(&text)?)
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Exit> {
    match std::env::var("LATTICE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Exit(EXIT_CONFIG, format!("LATTICE_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => match flag {
            Some(0) => Err(Exit(EXIT_CONFIG, "--threads must be positive".into())),
            f => Ok(f),
        },
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Exit> {
    match path {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Exit(EXIT_RUNTIME, e.to_string())),
    }
}

type Run<'a> = (&'a ExperimentConfig, Vec<TestReport>);

fn view<'a>(sel: &[&'a Run<'a>]) -> Vec<(&'a ExperimentConfig, &'a [TestReport])> {
    sel.iter().map(|(c, r)| (*c, r.as_slice())).collect()
}

fn run(config: &Path, out: Option<PathBuf>, format: Option<String>, flag: Option<usize>) -> Result<bool, Exit> {
    let suite = load(config)?;
    let format: Option<OutputFormat> = format.map(|f| f.parse()).transpose()?;
    if let Some(n) = threads(flag)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Exit(EXIT_RUNTIME, e.to_string()))?;
    }
    let outcomes = run_suite(&suite);
    let mut runs: Vec<Run> = Vec::new();
    for (c, o) in suite.experiments.iter().zip(outcomes) {
        match o.map_err(|e| Exit::from(e).with_context(&c.label()))? {
            Outcome::Reports(r) => {
                for rep in &r {
                    eprintln!("{}", rep.summary());
                }
                runs.push((c, r));
            }
            Outcome::Field(f) => {
                eprintln!("FIELD [{}] {} rows", c.label(), f.rows.len());
                emit(c.output.as_ref().map(|o| o.path.as_path()), &f.to_csv()?)?;
            }
        }
    }
    let pass = runs.iter().all(|(_, r)| r.iter().all(|r| r.pass));
    let all: Vec<_> = runs.iter().collect();
    if let Some(path) = out {
        write_reports(&view(&all), &path, format.unwrap_or_default())?;
    } else {
        let mut stdout = Vec::new();
        for entry in &all {
            match &entry.0.output {
                Some(o) => write_reports(&view(&[*entry]), &o.path, format.unwrap_or(o.format))?,
                None => stdout.push(*entry),
            }
        }
        if !stdout.is_empty() {
            let text = match format.unwrap_or_default() {
                OutputFormat::Json => reports_json(&view(&stdout))?,
                OutputFormat::Csv => reports_csv(&view(&stdout)),
            };
            emit(None, &text)?;
        }
    }
    Ok(pass)
}

fn simulate_cmd(config: &Path, out: Option<PathBuf>) -> Result<(), Exit> {
    let suite = load(config)?;
    if let Some(c) = suite.experiments.iter().find(|c| c.experiment != ExperimentKind::Simulate) {
        return Err(Exit(EXIT_CONFIG, format!("experiment `{}` is not a simulation", c.label())));
    }
    if out.is_some() && suite.experiments.len() > 1 {
        return Err(Exit(EXIT_CONFIG, "--out needs a single simulation".into()));
    }
    for c in &suite.experiments {
        let field = simulate(c).map_err(|e| Exit::from(e).with_context(&c.label()))?;
        let target = out.as_deref().or(c.output.as_ref().map(|o| o.path.as_path()));
        emit(target, &field.to_csv()?)?;
    }
    Ok(())
}

impl Exit {
    fn with_context(self, label: &str) -> Self {
        Exit(self.0, format!("{label}: {}", self.1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, format, threads } => run(&config, out, format, threads),
        Command::Simulate { config, out } => simulate_cmd(&config, out).map(|_| true),
        Command::Validate { config } => load(&config).map(|s| {
            eprintln!("ok: {} experiment(s)", s.experiments.len());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
