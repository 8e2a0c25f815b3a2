//! `heisenring`: spectra, FOEL tables, Sutherland checks, Temperley–Lieb
//! verification, Bethe continuation and curve samples for the Heisenberg
//! ferromagnet.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 solver non-convergence,
//! 3 verification failure. Reports are written before the exit code is set.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use heisenring::eigensolve::SolverConfig;
use heisenring::Geometry;

use commands::{BetheArgs, Format, Rendered, Settings, Status};

#[derive(Parser, Debug)]
#[command(name = "heisenring", version, about = "Exact spectra and Bethe roots for the spin-1/2 Heisenberg ferromagnet")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value_t = GeometryArg::Ring, global = true)]
    geometry: GeometryArg,
    /// Largest matrix diagonalized densely (per momentum block on rings).
    #[arg(long, default_value_t = SolverConfig::<f64>::default().dense_threshold, global = true)]
    dense_threshold: usize,
    /// Relative tolerance for grouping degenerate 2H eigenvalues.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol_degeneracy: f64,
    /// Allowed distance of an S² eigenvalue from s(s+1).
    #[arg(long, default_value_t = 1e-6, global = true)]
    tol_label: f64,
    /// Seed for Lanczos start vectors.
    #[arg(long, default_value_t = SolverConfig::<f64>::default().seed, global = true)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Json, global = true)]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GeometryArg {
    Ring,
    Chain,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Parity {
    #[default]
    All,
    Even,
    Odd,
}

#[derive(Args, Debug)]
struct Sizes {
    /// Number of sites.
    #[arg(long, conflicts_with = "n_range")]
    n: Option<usize>,
    /// Inclusive range of site counts, `A..B` or `A..=B`.
    #[arg(long)]
    n_range: Option<String>,
    /// Keep only even or odd N from the range.
    #[arg(long, value_enum, default_value_t = Parity::All)]
    parity: Parity,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Labeled 2H levels of one magnon sector (default k = N/2, which holds every spin).
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Minimum energies per spin and the FOEL ordering check.
    Foel(Sizes),
    /// Spin versus momentum minima, with the energy against cos θ projection.
    Sutherland(Sizes),
    /// Temperley–Lieb relations, intertwining and the diagram-route spectrum.
    TlVerify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Bethe roots: single-magnon dispersion (`--k 1 --n N`) or continuation in N.
    Bethe {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 60.0)]
        n_start: f64,
        /// Defaults to 4k.
        #[arg(long)]
        n_target: Option<f64>,
        /// Spread of the Hermite starting roots.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Cross-check integer N up to this size against exact diagonalization.
        #[arg(long, default_value_t = 16)]
        ed_max_n: usize,
    },
    /// Samples of the (d, ε) curve and the quadratic 4π² d(1 − d).
    Curve {
        #[arg(long, default_value_t = 1.001)]
        a_min: f64,
        #[arg(long, default_value_t = 1e6)]
        a_max: f64,
        #[arg(long, default_value_t = 60)]
        count: usize,
    },
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text.split_once("..").with_context(|| format!("range {text:?} is not of the form A..B"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    ensure!(a <= b, "empty range {text:?}");
    Ok((a, b))
}

impl Sizes {
    fn resolve(&self) -> Result<Vec<usize>> {
        let ns: Vec<usize> = match (self.n, &self.n_range) {
            (Some(n), _) => vec![n],
            (None, Some(r)) => {
                let (a, b) = parse_range(r)?;
                (a..=b).collect()
            }
            (None, None) => bail!("give --n or --n-range"),
        };
        let ns: Vec<usize> = ns
            .into_iter()
            .filter(|n| match self.parity {
                Parity::All => true,
                Parity::Even => n % 2 == 0,
                Parity::Odd => n % 2 == 1,
            })
            .collect();
        ensure!(!ns.is_empty(), "no site counts selected");
        Ok(ns)
    }
}

fn settings(common: &Common) -> Result<Settings> {
    ensure!(common.tol_degeneracy > 0.0 && common.tol_label > 0.0, "tolerances must be positive");
    ensure!(common.dense_threshold > 0, "dense threshold must be positive");
    let solver = SolverConfig {
        dense_threshold: common.dense_threshold,
        degeneracy_tol: common.tol_degeneracy,
        label_tol: common.tol_label,
        seed: common.seed,
        ..SolverConfig::default()
    };
    Ok(Settings {
        geometry: match common.geometry {
            GeometryArg::Ring => Geometry::Ring,
            GeometryArg::Chain => Geometry::Chain,
        },
        solver,
        format: match common.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        },
    })
}

fn run(cli: &Cli) -> Result<Rendered> {
    let s = settings(&cli.common)?;
    match &cli.command {
        Command::Spectrum { n, k } => commands::spectrum(*n, *k, &s),
        Command::Foel(sizes) => commands::foel(&sizes.resolve()?, &s),
        Command::Sutherland(sizes) => commands::sutherland(&sizes.resolve()?, &s),
        Command::TlVerify { n, k } => commands::tl_verify(*n, *k, &s),
        Command::Bethe { k, n, n_start, n_target, scale, ed_max_n } => commands::bethe(
            &BetheArgs { k: *k, n: *n, n_start: *n_start, n_target: *n_target, scale: *scale, ed_max_n: *ed_max_n },
            &s,
        ),
        Command::Curve { a_min, a_max, count } => commands::curve(*a_min, *a_max, *count, &s),
    }
}

fn is_non_convergence(err: &anyhow::Error) -> bool {
    use heisenring::Error::*;
    matches!(
        err.downcast_ref::<heisenring::Error>(),
        Some(NoConvergence { .. } | Divergence { .. } | SingularJacobian | RootCollision(..) | ResidualTooLarge { .. })
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli).and_then(|r| output::emit(&r.text, cli.common.out.as_deref()).map(|()| r)) {
        Ok(rendered) => {
            for line in &rendered.notes {
                eprintln!("{line}");
            }
            match rendered.status {
                Status::Success => ExitCode::SUCCESS,
                Status::NonConvergence => ExitCode::from(2),
                Status::VerificationFailed => ExitCode::from(3),
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_non_convergence(&err) { 2 } else { 1 })
        }
    }
}
