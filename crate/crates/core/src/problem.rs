//! Tracking-type optimal control of the random semilinear equation
//!
//! ```text
//! min_{u in C}  E[ 1/2 ||y(xi) - y_D||^2 ] + lambda2/2 ||u||^2 + lambda1 ||u||_{L1}
//! s.t.  -div(a(x, xi) grad y) + r(x, xi) y^3 = u,   y = 0 on the boundary,
//! ```
//!
//! with Karhunen-Loeve coefficients. The sample gradient in the
//! P0 inner product is `G(u, xi) = lambda2 u - P0(p(xi))`, `p` the adjoint.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::algorithms::StochasticGradient;
use crate::error::{Error, Result};
use crate::fem::{self, CoefficientSample, FemOptions, NewtonReport, TargetField};
use crate::mesh::TriMesh;
use crate::prox::{BoxSet, ProxSpec};
use crate::random_field::{FieldTable, KLFieldSpec, SampleStream, SampleVector};
use crate::schedule::BatchSchedule;
use crate::space::{ControlField, ControlSpace, InnerProductSpace, StateField};

/// Square of the unit-square Poincare constant, `1 / (2 pi^2)`.
pub const POINCARE_SQ: f64 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::PI);

/// `sin(2 pi x1) sin(2 pi x2) exp(2 x1) / 6`.
pub fn reference_target(x: [f64; 2]) -> f64 {
    use std::f64::consts::PI;
    (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() * (2.0 * x[0]).exp() / 6.0
}

/// Desired state `y_D`.
#[derive(Clone)]
pub enum Target {
    Reference,
    Zero,
    Function(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
    /// A discrete state on the problem mesh.
    State(StateField),
}

impl std::fmt::Debug for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Reference => f.write_str("Reference"),
            Target::Zero => f.write_str("Zero"),
            Target::Function(_) => f.write_str("Function(..)"),
            Target::State(_) => f.write_str("State(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub diffusion: KLFieldSpec,
    pub reaction: KLFieldSpec,
    pub target: Target,
    pub lambda1: f64,
    pub lambda2: f64,
    pub box_set: BoxSet,
    pub fem: FemOptions,
}

impl ProblemSpec {
    /// Means 0.5, correlation length 0.5, 20 terms, `lambda1 = 0.008`,
    /// `lambda2 = 0.001`, box `[-0.5, 0.5]`.
    pub fn reference() -> Self {
        Self {
            diffusion: KLFieldSpec::build(0.5, 0.5, 20).expect("valid"),
            reaction: KLFieldSpec::build(0.5, 0.5, 20).expect("valid"),
            target: Target::Reference,
            lambda1: 0.008,
            lambda2: 0.001,
            box_set: BoxSet::symmetric(0.5).expect("valid"),
            fem: FemOptions::default(),
        }
    }
}

/// Per-sample solve results.
#[derive(Clone, Debug)]
pub struct SampleEvaluation {
    /// `1/2 ||y - y_D||^2 + lambda2/2 ||u||^2`.
    pub objective: f64,
    pub gradient: ControlField,
    pub state: StateField,
    pub adjoint: StateField,
    pub a_min: f64,
    pub clamped: usize,
    pub newton: NewtonReport,
}

/// Batch estimates at one iterate.
#[derive(Clone, Debug)]
pub struct Estimate {
    /// Batch mean of `J` plus `lambda1 ||u||_{L1}`.
    pub f_hat: f64,
    /// `||u - prox(u - mean G)||`.
    pub r_n: f64,
    pub samples: usize,
    pub mean_gradient: ControlField,
}

/// Monitoring estimator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub batches: BatchSchedule,
    /// Number of previous `r_k` added into the windowed sum.
    pub window: usize,
    pub tol: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            batches: BatchSchedule::monitoring(),
            window: 50,
            tol: 2e-4,
        }
    }
}

pub struct SemilinearProblem {
    mesh: Arc<TriMesh>,
    spec: ProblemSpec,
    a_table: FieldTable,
    r_table: FieldTable,
    target: TargetField,
    target_norm: f64,
    prox: ProxSpec,
    gradient_lambda2: f64,
    clamps: AtomicUsize,
}

impl SemilinearProblem {
    pub fn new(mesh: Arc<TriMesh>, spec: ProblemSpec) -> Result<Self> {
        if !(spec.lambda1 >= 0.0 && spec.lambda2 >= 0.0) {
            return Err(Error::InvalidArgument("lambda1 and lambda2 must be nonnegative".into()));
        }
        if spec.diffusion.n_terms() != spec.reaction.n_terms() {
            return Err(Error::InvalidArgument(
                "diffusion and reaction expansions need the same number of terms".into(),
            ));
        }
        let target = match &spec.target {
            Target::Reference => TargetField::from_fn(&mesh, reference_target),
            Target::Zero => TargetField::zero(&mesh),
            Target::Function(f) => TargetField::from_fn(&mesh, |x| f(x)),
            Target::State(y) => TargetField::from_state(&mesh, y)?,
        };
        let a_table = spec.diffusion.tabulate(mesh.midpoint_nodes());
        let r_table = spec.reaction.tabulate(mesh.degree4_nodes());
        let prox = ProxSpec::l1_box(spec.lambda1, spec.box_set.clone())?;
        Ok(Self {
            target_norm: fem::target_norm(&mesh, &target),
            gradient_lambda2: spec.lambda2,
            mesh,
            spec,
            a_table,
            r_table,
            target,
            prox,
            clamps: AtomicUsize::new(0),
        })
    }

    /// Uses a different `lambda2` in the gradient than in the objective.
    /// Only meaningful for testing the gradient checker.
    pub fn with_gradient_fault(mut self, lambda2_in_gradient: f64) -> Self {
        self.gradient_lambda2 = lambda2_in_gradient;
        self
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn space(&self) -> &ControlSpace {
        self.mesh.control_space()
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn prox(&self) -> &ProxSpec {
        &self.prox
    }

    pub fn n_terms(&self) -> usize {
        self.spec.diffusion.n_terms()
    }

    pub fn target_l2_norm(&self) -> f64 {
        self.target_norm
    }

    /// Total number of clamped coefficient nodes over all solves so far.
    pub fn clamp_total(&self) -> usize {
        self.clamps.load(Ordering::Relaxed)
    }

    pub fn coefficients(&self, xi: &SampleVector) -> Result<CoefficientSample> {
        if xi.xi_a.len() != self.n_terms() || xi.xi_r.len() != self.n_terms() {
            return Err(Error::LengthMismatch { expected: self.n_terms(), found: xi.xi_a.len() });
        }
        let c = CoefficientSample::from_nodal(&self.mesh, self.a_table.evaluate(&xi.xi_a), self.r_table.evaluate(&xi.xi_r))?;
        self.clamps.fetch_add(c.clamp_count(), Ordering::Relaxed);
        Ok(c)
    }

    fn solve_state_checked(&self, coeffs: &CoefficientSample, u: &ControlField) -> Result<(StateField, NewtonReport)> {
        let (y, report) = fem::solve_state(&self.mesh, coeffs, u, &self.spec.fem)?;
        if !report.converged {
            return Err(Error::NewtonDiverged {
                iterations: report.iterations,
                residual: report.final_residual_norm,
            });
        }
        Ok((y, report))
    }

    pub fn state(&self, u: &ControlField, xi: &SampleVector) -> Result<StateField> {
        let c = self.coefficients(xi)?;
        Ok(self.solve_state_checked(&c, u)?.0)
    }

    fn tracking(&self, y: &StateField, u: &ControlField) -> Result<f64> {
        let d = fem::l2_distance(&self.mesh, y, &self.target)?;
        Ok(0.5 * d * d + 0.5 * self.spec.lambda2 * self.space().inner(u, u))
    }

    /// `J(u, xi) = 1/2 ||y - y_D||^2 + lambda2/2 ||u||^2`.
    pub fn objective_sample(&self, u: &ControlField, xi: &SampleVector) -> Result<f64> {
        self.space().ensure_member(u)?;
        let y = self.state(u, xi)?;
        self.tracking(&y, u)
    }

    /// `G(u, xi) = lambda2 u - P0(p)`.
    pub fn stochastic_gradient(&self, u: &ControlField, xi: &SampleVector) -> Result<ControlField> {
        Ok(self.evaluate(u, xi)?.gradient)
    }

    /// State, adjoint, objective and gradient from one state solve.
    pub fn evaluate(&self, u: &ControlField, xi: &SampleVector) -> Result<SampleEvaluation> {
        self.space().ensure_member(u)?;
        let c = self.coefficients(xi)?;
        let (y, newton) = self.solve_state_checked(&c, u)?;
        let p = fem::solve_adjoint(&self.mesh, &c, &y, &self.target, &self.spec.fem)?;
        let pp = fem::project_p1_to_p0(&self.mesh, &p)?;
        let gradient = self.space().combine(self.gradient_lambda2, u, -1.0, &pp);
        Ok(SampleEvaluation {
            objective: self.tracking(&y, u)?,
            gradient,
            state: y,
            adjoint: p,
            a_min: c.a_min(),
            clamped: c.clamp_count(),
            newton,
        })
    }

    /// `lambda1 ||u||_{L1}`.
    pub fn eta(&self, u: &ControlField) -> f64 {
        self.spec.lambda1 * self.space().norm_l1(u).expect("field from problem space")
    }

    /// `C_1(xi) = C_P^2 / a_min(xi)`.
    pub fn stability_constant(a_min: f64) -> f64 {
        POINCARE_SQ / a_min
    }

    /// `f_hat_n` and `r_n` from the `m_n` samples of batch `n` in `stream`.
    pub fn estimate(&self, u: &ControlField, n: usize, stream: &SampleStream, batches: &BatchSchedule, parallel: bool) -> Result<Estimate> {
        let m = batches.size(n);
        let start = batches.offset(n);
        let eval = |k: u64| self.evaluate(u, &stream.draw(start + k, self.n_terms()));
        let evals: Vec<SampleEvaluation> = if parallel && m > 1 {
            (0..m as u64).into_par_iter().map(eval).collect::<Result<_>>()?
        } else {
            (0..m as u64).map(eval).collect::<Result<_>>()?
        };
        let mean_j = evals.iter().map(|e| e.objective).sum::<f64>() / m as f64;
        let grads: Vec<ControlField> = evals.into_iter().map(|e| e.gradient).collect();
        let mean_gradient = self.space().mean(&grads);
        let r_n = self.prox.stationarity_measure(self.space(), u, &mean_gradient)?;
        Ok(Estimate {
            f_hat: mean_j + self.eta(u),
            r_n,
            samples: m,
            mean_gradient,
        })
    }

    /// `(f_hat_n, m_n)` with the monitoring batch schedule.
    pub fn estimate_objective(&self, u: &ControlField, n: usize, stream: &SampleStream) -> Result<(f64, usize)> {
        let e = self.estimate(u, n, stream, &BatchSchedule::monitoring(), false)?;
        Ok((e.f_hat, e.samples))
    }

    /// `r_n` with the monitoring batch schedule.
    pub fn estimate_stationarity(&self, u: &ControlField, n: usize, stream: &SampleStream) -> Result<f64> {
        Ok(self.estimate(u, n, stream, &BatchSchedule::monitoring(), false)?.r_n)
    }

    /// Gradient oracle drawing sample `k` from `stream`.
    pub fn oracle(&self, stream: SampleStream) -> PathOracle<'_> {
        PathOracle { problem: self, stream }
    }
}

/// [`StochasticGradient`] view of a problem and a sample lane.
pub struct PathOracle<'a> {
    problem: &'a SemilinearProblem,
    stream: SampleStream,
}

impl StochasticGradient<ControlSpace> for PathOracle<'_> {
    fn gradient(&self, u: &ControlField, sample: u64) -> Result<ControlField> {
        let xi = self.stream.draw(sample, self.problem.n_terms());
        self.problem.stochastic_gradient(u, &xi)
    }
}
