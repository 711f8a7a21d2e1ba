//! `srw`: compile circuits to string rewriting instances, count walks,
//! verify compilations and emulate the moment estimator.
//!
//! Every command prints one JSON result document on stdout. Exit codes:
//! 0 and 1 report a positive or negative decision (or success and
//! failure for commands without one), 2 a usage or parse error, 3 a
//! compile failure or exhausted budget, and 4 a zero or undecided
//! result.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srw_core::spectral::MMode;

use output::{Failure, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "srw", version, about = "String rewriting walk counting and circuit compilation")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest number of distinct strings a walk or graph may visit.
    #[arg(long, global = true)]
    vertex_budget: Option<usize>,
    /// Result schema version to emit.
    #[arg(long, global = true, default_value_t = SCHEMA_VERSION)]
    schema_version: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a circuit and input into a rewriting instance.
    Compile(CompileArgs),
    /// Compute Δ(n) = (Aⁿ)_{s,t} − (Aⁿ)_{s,t′} for an instance.
    Delta(DeltaArgs),
    /// Check a compiled instance against its circuit.
    Verify(VerifyArgs),
    /// Path-graph corner entry and bounds.
    Spectral(SpectralArgs),
    /// Emulate moment estimation on a compiled instance.
    Estimate(EstimateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MModeArg {
    Paper,
    Minimal,
    SignOnly,
}

impl From<MModeArg> for MMode {
    fn from(m: MModeArg) -> Self {
        match m {
            MModeArg::Paper => MMode::Paper,
            MModeArg::Minimal => MMode::Minimal,
            MModeArg::SignOnly => MMode::SignOnly,
        }
    }
}

#[derive(Debug, Args)]
struct CompileArgs {
    /// Circuit in text form.
    #[arg(long)]
    circuit: PathBuf,
    /// Input bits, qubit 0 first.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value = "paper")]
    m_mode: MModeArg,
    /// Where to write the instance JSON.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct DeltaArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Walk length (default: the instance's m).
    #[arg(long)]
    steps: Option<usize>,
    /// Exact integer counts (default).
    #[arg(long, conflicts_with = "scaled")]
    exact: bool,
    /// Floating Δ(n)/cⁿ with the instance's c.
    #[arg(long)]
    scaled: bool,
    /// Scale for --scaled when the instance has none.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    input: String,
    /// Largest n for exact walk counting (default: ℓ + 5).
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectralArgs {
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    m: usize,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Outcome perturbation bound (default: chosen from ε).
    #[arg(long)]
    eta: Option<f64>,
    /// Failure probability per outcome (default: chosen from ε).
    #[arg(long)]
    theta: Option<f64>,
    /// Samples per state (default: the Hoeffding count, capped).
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// One minus the per-state confidence.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

fn run(cli: Cli) -> Result<output::CommandResult, Failure> {
    if cli.schema_version != SCHEMA_VERSION {
        return Err(Failure::usage(format!(
            "unsupported schema version {} (this build emits {SCHEMA_VERSION})",
            cli.schema_version
        )));
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot start {n} threads: {e}")))?;
    }
    let budget = cli.vertex_budget;
    match cli.command {
        Command::Compile(a) => commands::compile(&a.circuit, &a.input, a.m_mode.into(), &a.output),
        Command::Delta(a) => commands::delta(&a.instance, a.steps, a.scaled, a.c, budget),
        Command::Verify(a) => commands::verify(&a.instance, &a.circuit, &a.input, a.max_steps, budget),
        Command::Spectral(a) => commands::spectral(a.ell, a.m),
        Command::Estimate(a) => commands::estimate(&a.instance, a.eta, a.theta, a.samples, a.seed, a.delta, budget),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(result) => {
            println!("{}", result.to_json());
            ExitCode::from(result.exit_code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            println!("{}", failure.to_json());
            ExitCode::from(failure.code)
        }
    }
}
