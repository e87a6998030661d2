//! Command-line driver. Exit status: 0 success, 1 failed check,
//! 2 configuration error, 3 solver failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stochprox::harness::{self, RunConfig};
use stochprox::Error;

#[derive(Parser)]
#[command(name = "stochprox", version, about = "Stochastic proximal gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; omitted keys take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Mesh divisions per side
    #[arg(long, global = true)]
    mesh_n: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Suppress the summary on stderr
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the stochastic proximal gradient method on one mesh
    Solve,
    /// Solve on several meshes and tabulate the results
    SweepMesh {
        /// Comma-separated mesh sizes (default: `sweep_meshes` from the config)
        #[arg(long, value_delimiter = ',')]
        meshes: Vec<usize>,
    },
    /// Compare the adjoint gradient with central differences
    CheckGradient {
        #[arg(long)]
        trials: Option<usize>,
        /// Step sizes; more than one prints the error for each
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        /// Use this lambda2 in the gradient only (the check should fail)
        #[arg(long)]
        fault_lambda2: Option<f64>,
    },
    /// Compare the closed-form prox with brute-force minimization
    CheckProx {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Dump one sample of the coefficient fields at triangle centroids
    SampleField {
        #[arg(long)]
        index: Option<u64>,
    },
}

enum Failure {
    Check(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn load_config(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.mesh_n {
        cfg.mesh_n = n;
    }
    if let Some(n) = c.n_max {
        cfg.n_max = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn open_out(c: &Common) -> Result<Box<dyn Write>, Error> {
    Ok(match &c.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    let mut cfg = load_config(c)?;
    match cli.command {
        Command::Solve => {
            let mut out = open_out(c)?;
            let summary = harness::solve(&cfg, cfg.mesh_n, &mut out)?;
            if !c.quiet {
                eprintln!("{summary}");
            }
        }
        Command::SweepMesh { meshes } => {
            let meshes = if meshes.is_empty() {
                cfg.sweep_meshes.clone()
            } else if meshes.contains(&0) {
                return Err(Error::Config("mesh sizes must be at least 1".into()).into());
            } else {
                meshes
            };
            let mut out = open_out(c)?;
            let quiet = c.quiet;
            harness::sweep(&cfg, &meshes, &mut out, &mut |s| {
                if !quiet {
                    eprintln!("{s}\n");
                }
            })?;
        }
        Command::CheckGradient { trials, epsilon, fault_lambda2 } => {
            if let Some(t) = trials {
                cfg.gradient_trials = t;
            }
            if fault_lambda2.is_some() {
                cfg.gradient_fault_lambda2 = fault_lambda2;
            }
            cfg.validate()?;
            if epsilon.len() > 1 {
                for (e, err) in harness::epsilon_sweep(&cfg, cfg.mesh_n, &epsilon)? {
                    println!("epsilon {e:.1e}  worst relative error {err:.3e}");
                }
                return Ok(());
            }
            let eps = epsilon.first().copied().unwrap_or(cfg.fd_step);
            let report = harness::check_gradient(&cfg, cfg.mesh_n, eps)?;
            let worst = report.max_relative_error();
            println!("worst relative error {worst:.3e} over {} trials (tolerance {:.1e})", report.trials.len(), report.tolerance);
            if !report.passed() {
                return Err(Failure::Check(format!("gradient check failed: {worst:.3e} > {:.1e}", report.tolerance)));
            }
        }
        Command::CheckProx { trials } => {
            if let Some(t) = trials {
                cfg.prox_trials = t;
            }
            cfg.validate()?;
            let report = harness::check_prox(&cfg)?;
            println!(
                "worst prox discrepancy {:.3e} over {} trials at (z, t) = ({:.6}, {:.6})",
                report.max_error, report.trials, report.worst.0, report.worst.1
            );
            if !report.passed() {
                return Err(Failure::Check(format!("prox check failed: {:.3e} > {:.1e}", report.max_error, report.tolerance)));
            }
        }
        Command::SampleField { index } => {
            let mut out = open_out(c)?;
            harness::checks::sample_field(&cfg, cfg.mesh_n, index.unwrap_or(cfg.field_sample), &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
