//! Experiment drivers behind the command-line tool: configuration, single
//! runs with the monitoring estimators, mesh sweeps, and numerical checks.
//!
//! Seed policy: every mesh size `N` gets its own pair of sample lanes
//! derived from the base seed, `(N << 8) | purpose`, so a sweep row and a
//! single run on the same mesh with the same seed see the same samples.

pub mod checks;
pub mod config;
pub mod run;

use std::sync::Arc;

use crate::error::Result;
use crate::fem;
use crate::mesh::TriMesh;
use crate::problem::{ProblemSpec, SemilinearProblem, Target};
use crate::random_field::SampleStream;
use crate::space::ControlField;

pub use checks::{check_gradient, check_prox, epsilon_sweep, sample_field, GradientCheckReport, ProxCheckReport};
pub use config::{InitialControl, RunConfig, StopRule, ThetaMode};
pub use run::{solve, sweep, SolveSummary, SweepRow, RUN_HEADER, SWEEP_HEADER};

/// What a sample lane is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lane {
    /// Single samples driving the iteration.
    Path = 0,
    /// Batches for the monitoring estimators.
    Estimator = 1,
    /// Gradient-check samples.
    Check = 2,
    /// Field dumps.
    Field = 3,
}

pub fn stream(cfg: &RunConfig, mesh_n: usize, lane: Lane) -> SampleStream {
    SampleStream::new(cfg.seed, ((mesh_n as u64) << 8) | lane as u64).with_half_width(cfg.sample_half_width)
}

pub fn problem_spec(cfg: &RunConfig) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        diffusion: cfg.diffusion()?,
        reaction: cfg.reaction()?,
        target: Target::Reference,
        lambda1: cfg.lambda1,
        lambda2: cfg.lambda2,
        box_set: cfg.box_set()?,
        fem: cfg.fem_options(),
    })
}

pub fn build_problem(cfg: &RunConfig, mesh_n: usize) -> Result<SemilinearProblem> {
    let mesh = Arc::new(TriMesh::build(mesh_n)?);
    let problem = SemilinearProblem::new(mesh, problem_spec(cfg)?)?;
    Ok(match cfg.gradient_fault_lambda2 {
        Some(l2) => problem.with_gradient_fault(l2),
        None => problem,
    })
}

/// Starting control `u_1`. The sine start is not clipped into the box.
pub fn initial_control(cfg: &RunConfig, problem: &SemilinearProblem) -> ControlField {
    use std::f64::consts::PI;
    match cfg.initial {
        InitialControl::Sine => fem::project_fn_p0(problem.mesh(), |x| (4.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin()),
        InitialControl::Zero => problem.space().constant(0.0),
        InitialControl::Constant => problem.space().constant(cfg.initial_constant),
    }
}
