#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod report;

/// p-Laplacian Green kernels, capacities, constants and the p -> 1 limit.
#[derive(Parser)]
#[command(name = "green-imcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial Green kernel of a model manifold.
    Green(GreenArgs),
    /// Condenser capacity, exact and variational.
    Capacity(CapacityArgs),
    /// p-capacitor potentials along a p-schedule and their Moser transforms.
    Capacitor(CapacitorArgs),
    /// IMCF core, gradient estimate and barrier margins.
    ImcfLimit(ImcfArgs),
    /// Explicit constants along a p-grid with blow-up classification.
    Constants(ConstantsArgs),
    /// No-go certificate for the Moser iteration.
    Nogo(NogoArgs),
    /// Runs every acceptance check.
    VerifyAll(VerifyArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Serialize)]
struct Common {
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct GreenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Model description (JSON).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    /// Dirichlet radius; `inf` for the whole manifold.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Serialize)]
struct CapacityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    /// Inner radius of the condenser.
    #[arg(long)]
    s: Option<f64>,
    /// Outer radius of the condenser; `inf` allowed.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Mesh size of the variational check on planar annuli.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Serialize)]
struct CapacitorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Mesh file with inner/outer boundary tags.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Generated annulus `r0,r1,h` instead of a mesh file.
    #[arg(long, value_delimiter = ',')]
    annulus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_schedule: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    warm_start: Option<bool>,
}

#[derive(Args, Serialize)]
struct ImcfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// p values used for the extrapolation of the kernel core.
    #[arg(long, value_delimiter = ',')]
    p_sequence: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    probes: Option<Vec<f64>>,
    /// Exponent of the p-supersolution certificate.
    #[arg(long)]
    barrier_p: Option<f64>,
}

#[derive(Args, Serialize)]
struct ConstantsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    sobolev: Option<f64>,
    /// Smallest p - 1 of the grid.
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Serialize)]
struct NogoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Random schedules tried in total.
    #[arg(long)]
    trials: Option<usize>,
    /// Truncation length of the random schedules.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Subset of criteria to run.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<usize>>,
}

/// Why a run stopped; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Malformed input: exit 2.
    Input(String),
    /// Named checks that did not hold: exit 1.
    Checks(Vec<String>),
    /// A computation failed: exit 1.
    Run(String),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GREEN_IMCF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("GREEN_IMCF_THREADS must be a positive integer (got '{raw}')")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Green(a) => commands::green(config::load(a.common.config.as_deref(), &a)?),
        Command::Capacity(a) => commands::capacity(config::load(a.common.config.as_deref(), &a)?),
        Command::Capacitor(a) => commands::capacitor(config::load(a.common.config.as_deref(), &a)?),
        Command::ImcfLimit(a) => commands::imcf_limit(config::load(a.common.config.as_deref(), &a)?),
        Command::Constants(a) => commands::constants(config::load(a.common.config.as_deref(), &a)?),
        Command::Nogo(a) => commands::nogo(config::load(a.common.config.as_deref(), &a)?),
        Command::VerifyAll(a) => commands::verify_all(config::load(a.common.config.as_deref(), &a)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Checks(names)) => {
            for n in &names {
                eprintln!("FAILED: {n}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
