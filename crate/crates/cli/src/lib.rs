//! Scene-file driven checks for Killing-type equations, Lie derivatives of
//! tensors and spinors, and the Lie-algebra decompositions behind them.

pub mod commands;
pub mod report;
pub mod scene;
pub mod selftest;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 2.
    #[error("{0}")]
    Input(String),
}

pub fn parse_signature(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s
        .split_once(',')
        .ok_or_else(|| format!("signature {s:?} must look like p,q"))?;
    let p = p.trim().parse().map_err(|_| format!("bad p in {s:?}"))?;
    let q = q.trim().parse().map_err(|_| format!("bad q in {s:?}"))?;
    Ok((p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    So,
    Cso,
    Gl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LiftArg {
    Kosmann,
    Penrose,
    General,
}

#[derive(Debug, Parser)]
#[command(name = "kosmann", version, about = "Lie derivatives of metrics, densities and spinors on chart-described manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print the report as JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every random battery.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Override the tolerance of the primary check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Also compare against the flow oracle where supported.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Include wall-clock time in the report (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Killing equation £_ξ g = 0.
    CheckKilling {
        scene: PathBuf,
        #[arg(long)]
        field: String,
    },
    /// Conformal Killing equation £_ξ g = (2/m)(∇·ξ) g.
    CheckConformal {
        scene: PathBuf,
        #[arg(long)]
        field: String,
    },
    /// Natural lift minus its projection onto so, cso or gl.
    CheckGkilling {
        scene: PathBuf,
        #[arg(long)]
        field: String,
        #[arg(long, value_enum)]
        group: GroupArg,
    },
    /// Lie derivative of the metric or of a tensor density.
    ///
    /// A tensor target is written `upper,lower,weight;c0;c1;...` with the
    /// components in row-major order, upper indices first.
    LieTensor {
        scene: PathBuf,
        #[arg(long)]
        field: String,
        #[arg(long)]
        target: String,
    },
    /// Lie derivative of the scene spinor.
    LieSpinor {
        scene: PathBuf,
        #[arg(long)]
        field: String,
        #[arg(long, value_enum)]
        lift: LiftArg,
        /// JSON file {"components": [...], "algebra": [[...]]} for --lift general.
        #[arg(long)]
        coeffs: Option<PathBuf>,
    },
    /// Split a matrix into so(p,q), traceless η-symmetric and trace parts.
    DecomposeMatrix {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_parser = parse_signature)]
        signature: (usize, usize),
    },
    /// Check the Clifford relation of the built gamma matrices.
    VerifyClifford {
        #[arg(long, value_parser = parse_signature)]
        signature: (usize, usize),
    },
    /// Check the reductive projector family.
    VerifyProjectors {
        #[arg(long, value_parser = parse_signature)]
        signature: (usize, usize),
    },
    /// Run the full invariant battery.
    Selftest,
}

/// Runs a parsed command line. `echo` is recorded in the report verbatim.
pub fn run(cli: &Cli, echo: Vec<String>) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut report = Report::new(echo, cli.seed);
    commands::dispatch(cli, &mut report)?;
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}
