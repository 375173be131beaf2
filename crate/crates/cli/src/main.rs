//! `ncstoch`: symbolic calculus, simulation and verification runs from the
//! command line. Exit status 0 when every asserted tolerance holds, 1 when
//! one fails, 2 on bad input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "ncstoch", version, about = "Noncommutative stochastic calculus toolkit")]
struct Cli {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print `∂_{x_i} P` (with --var) or `∂^k P` (with --k) in canonical form.
    Diff(ExperimentConfig),
    /// Evaluate an expression on matrices read from a JSON file.
    Eval(ExperimentConfig),
    /// Simulate Hermitian Brownian motion paths into NCP1 files.
    Sim(ExperimentConfig),
    /// Quadratic covariation sums against their closed form over a mesh sequence.
    Qc(ExperimentConfig),
    /// Itô formula residuals over a mesh sequence.
    Ito(ExperimentConfig),
    /// BDG moment comparison for a stochastic integral.
    Bdg(ExperimentConfig),
    /// Itô isometry for a stochastic integral.
    Isometry(ExperimentConfig),
    /// Spectral distribution of X(T) against the semicircle law.
    Esd(ExperimentConfig),
    /// Run the built-in acceptance criteria.
    Selftest(ExperimentConfig),
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or inputs.
    Config(String),
    /// A tolerance did not hold.
    Tolerance,
}

impl From<ncstoch_core::Error> for Failure {
    fn from(e: ncstoch_core::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ncstoch_core::trace_poly::ParseError> for Failure {
    fn from(e: ncstoch_core::trace_poly::ParseError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let base = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let (name, flags) = match &cli.command {
        Command::Diff(c) => ("diff", c),
        Command::Eval(c) => ("eval", c),
        Command::Sim(c) => ("sim", c),
        Command::Qc(c) => ("qc", c),
        Command::Ito(c) => ("ito", c),
        Command::Bdg(c) => ("bdg", c),
        Command::Isometry(c) => ("isometry", c),
        Command::Esd(c) => ("esd", c),
        Command::Selftest(c) => ("selftest", c),
    };
    let cfg = base.overridden_by(flags);
    match name {
        "diff" => commands::diff(cfg),
        "eval" => commands::eval(cfg),
        "sim" => commands::sim(cfg),
        "qc" => commands::qc(cfg),
        "ito" => commands::ito(cfg),
        "bdg" => commands::bdg(cfg),
        "isometry" => commands::isometry(cfg),
        "esd" => commands::esd(cfg),
        _ => commands::selftest(cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
