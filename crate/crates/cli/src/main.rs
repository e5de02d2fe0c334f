//! `aggdiff`: minimizers of aggregation-diffusion free energies from the command line.
//!
//! Every subcommand writes CSV or JSON to stdout, or to `--out PATH` together
//! with `PATH.manifest.json`. Exit codes: 0 success, 2 invalid input, 3
//! numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use aggdiff_core::quadrature::{QuadMode, QuadratureRule};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl From<aggdiff_core::Error> for CliError {
    fn from(err: aggdiff_core::Error) -> Self {
        use aggdiff_core::Error as E;
        match err {
            E::InvalidParameter(_) | E::Regime(_) => CliError::Usage(err.to_string()),
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "aggdiff", version, about = "Free-energy minimizers of aggregation-diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimizer for the quartic kernel.
    Quartic(commands::QuarticArgs),
    /// m(0) along an alpha grid for even lambda (CSV).
    MassCurve(commands::MassCurveArgs),
    /// Critical diffusion exponent q_N(lambda).
    CriticalQ(commands::CriticalQArgs),
    /// q_N(lambda) over a lambda range with the polynomial ansatz (CSV).
    CriticalCurve(commands::CriticalCurveArgs),
    /// Radial density on a log-spaced grid (CSV).
    Profile(commands::ProfileArgs),
    /// Radial interaction kernel K_{N,lambda}(r, s).
    Kernel(commands::KernelArgs),
    /// One polynomial-ansatz solve with a transformed-Gauss check.
    GeneralSolve(commands::GeneralSolveArgs),
    /// m(L) along an L grid for even lambda (CSV).
    Monotonicity(commands::MonotonicityArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Quadrature scheme: gauss or riemann. The default depends on the command.
    #[arg(long)]
    quad_mode: Option<QuadMode>,
    /// Gauss order per panel, or number of Riemann points.
    #[arg(long)]
    quad_points: Option<usize>,
    /// Right end of the Riemann grid.
    #[arg(long)]
    quad_rmax: Option<f64>,
    /// Relative tolerance of adaptive quadrature.
    #[arg(long)]
    quad_rtol: Option<f64>,
    /// Write the result here and a manifest next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    /// `base` with the command-line overrides applied. Switching to Riemann
    /// without further flags gives 1000 points on [0, 20].
    pub fn rule(&self, base: QuadratureRule) -> Result<QuadratureRule, CliError> {
        let mut rule = base;
        if let Some(mode) = self.quad_mode {
            if mode != base.mode {
                rule = match mode {
                    QuadMode::TransformedGauss => QuadratureRule::transformed_gauss(),
                    QuadMode::UniformRiemann => QuadratureRule::reference_riemann(),
                };
                rule.abs_tol = base.abs_tol;
                rule.rel_tol = base.rel_tol;
            }
        }
        if let Some(n) = self.quad_points {
            rule.npoints = n;
        }
        if let Some(r) = self.quad_rmax {
            rule.r_max = r;
        }
        if let Some(t) = self.quad_rtol {
            rule.rel_tol = t;
        }
        rule.validate()?;
        Ok(rule)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("AGGDIFF_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("AGGDIFF_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let start = Instant::now();
    let (artifact, common) = match &cli.command {
        Command::Quartic(a) => (commands::quartic(a)?, &a.common),
        Command::MassCurve(a) => (commands::mass_curve(a)?, &a.common),
        Command::CriticalQ(a) => (commands::critical_q(a)?, &a.common),
        Command::CriticalCurve(a) => (commands::critical_curve(a)?, &a.common),
        Command::Profile(a) => (commands::profile(a)?, &a.common),
        Command::Kernel(a) => (commands::kernel(a)?, &a.common),
        Command::GeneralSolve(a) => (commands::general_solve(a)?, &a.common),
        Command::Monotonicity(a) => (commands::monotonicity(a)?, &a.common),
    };
    output::emit(&artifact.artifact, common.out.as_deref(), start.elapsed())
        .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))?;
    artifact.status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
