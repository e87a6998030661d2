//! Stochastic proximal gradient methods in Hilbert spaces.
//!
//! The optimization loops in [`algorithms`] are generic over an
//! [`InnerProductSpace`](space::InnerProductSpace), a stochastic gradient
//! oracle and a [`ProximalTerm`](prox::ProximalTerm). The remaining modules
//! build a concrete test problem: optimal control of a semilinear
//! diffusion-reaction equation with random Karhunen-Loeve coefficients,
//! an L1 penalty and box constraints, discretized by P1/P0 finite elements
//! on the unit square.
//!
//! ```no_run
//! use std::sync::Arc;
//! use stochprox::prelude::*;
//!
//! let mesh = Arc::new(TriMesh::build(20).unwrap());
//! let problem = SemilinearProblem::new(mesh, ProblemSpec::reference()).unwrap();
//! let xi = draw_sample(7, 0, problem.n_terms());
//! let u = problem.space().constant(0.1);
//! let g = problem.stochastic_gradient(&u, &xi).unwrap();
//! println!("||G|| = {}", problem.space().norm(&g));
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algorithms;
pub mod error;
pub mod fem;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod prox;
pub mod random_field;
pub mod schedule;
pub mod space;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::algorithms::{
        run_sgd, run_spg_decreasing, run_vr_spg, IterationRow, LoopControl, Monitor, RunRecord, StochasticGradient,
    };
    pub use crate::error::{Error, Result};
    pub use crate::fem::{CoefficientSample, FemOptions, LinearSolver, NewtonReport, TargetField};
    pub use crate::mesh::TriMesh;
    pub use crate::problem::{EstimatorConfig, ProblemSpec, SemilinearProblem, Target};
    pub use crate::prox::{BoxSet, NoProx, ProxSpec, ProxVariant, ProximalTerm};
    pub use crate::random_field::{draw_sample, KLFieldSpec, SampleStream, SampleVector};
    pub use crate::schedule::{validate_schedule, BatchSchedule, ScheduleReport, StepSchedule};
    pub use crate::space::{ControlField, ControlSpace, InnerProductSpace, StateField};
}
