//! Finite-difference gradient check, brute-force prox check and field dumps.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::prox::ProxSpec;
use crate::random_field::{FieldTable, SampleVector};
use crate::space::InnerProductSpace;

use super::{build_problem, stream, Lane, RunConfig};

/// Minimizer of `lambda1 |v| + (v - z)^2 / (2t)` over `[lower, upper]` by
/// golden-section search; the objective is convex so this needs nothing
/// about the closed form.
pub fn brute_force_prox(z: f64, t: f64, lambda1: f64, lower: f64, upper: f64) -> f64 {
    let phi = |v: f64| lambda1 * v.abs() + (v - z) * (v - z) / (2.0 * t);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lower, upper);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while b - a > 1e-13 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = phi(d);
        }
    }
    // the kink and the end points are candidates golden section can only
    // approach
    let mid = 0.5 * (a + b);
    let mut best = mid;
    for v in [lower, upper, 0.0f64.clamp(lower, upper)] {
        if phi(v) < phi(best) {
            best = v;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct ProxCheckReport {
    pub trials: usize,
    pub max_error: f64,
    /// `(z, t)` with the largest discrepancy.
    pub worst: (f64, f64),
    pub tolerance: f64,
}

impl ProxCheckReport {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// Closed-form prox against [`brute_force_prox`] on random `(z, t)`.
pub fn check_prox(cfg: &RunConfig) -> Result<ProxCheckReport> {
    cfg.validate()?;
    let spec = ProxSpec::l1_box(cfg.lambda1, cfg.box_set()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = ProxCheckReport { trials: cfg.prox_trials, max_error: 0.0, worst: (0.0, 0.0), tolerance: cfg.prox_tol };
    for _ in 0..cfg.prox_trials {
        let z = rng.random_range(-1.5..1.5);
        // log-uniform over [1e-2, 1e2] reaches both sides of the dead zone
        let t = 10f64.powf(rng.random_range(-2.0..2.0));
        let err = (spec.scalar_prox(0, z, t) - brute_force_prox(z, t, cfg.lambda1, cfg.u_lower, cfg.u_upper)).abs();
        if err > report.max_error {
            report.max_error = err;
            report.worst = (z, t);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct GradientTrial {
    pub finite_difference: f64,
    pub adjoint: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug)]
pub struct GradientCheckReport {
    pub epsilon: f64,
    pub trials: Vec<GradientTrial>,
    pub tolerance: f64,
}

impl GradientCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.trials.iter().map(|t| t.relative_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_relative_error() <= self.tolerance
    }
}

/// Central differences `(J(u + eps v) - J(u - eps v)) / (2 eps)` against
/// `<G(u, xi), v>` for random controls in the box, unit directions and
/// samples.
pub fn check_gradient(cfg: &RunConfig, mesh_n: usize, epsilon: f64) -> Result<GradientCheckReport> {
    cfg.validate()?;
    let problem = build_problem(cfg, mesh_n)?;
    let space = problem.space();
    let samples = stream(cfg, mesh_n, Lane::Check);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut trials = Vec::with_capacity(cfg.gradient_trials);
    for k in 0..cfg.gradient_trials {
        let u = space.field((0..space.dim()).map(|_| rng.random_range(cfg.u_lower..=cfg.u_upper)).collect())?;
        let v = space.field((0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let v = space.combine(1.0 / space.norm(&v), &v, 0.0, &v);
        let xi = samples.draw(k as u64, problem.n_terms());
        let plus = problem.objective_sample(&space.combine(1.0, &u, epsilon, &v), &xi)?;
        let minus = problem.objective_sample(&space.combine(1.0, &u, -epsilon, &v), &xi)?;
        let fd = (plus - minus) / (2.0 * epsilon);
        let adjoint = space.inner(&problem.stochastic_gradient(&u, &xi)?, &v);
        let scale = fd.abs().max(adjoint.abs()).max(f64::MIN_POSITIVE);
        trials.push(GradientTrial { finite_difference: fd, adjoint, relative_error: (fd - adjoint).abs() / scale });
    }
    Ok(GradientCheckReport { epsilon, trials, tolerance: cfg.gradient_tol })
}

/// Worst relative error for each step size.
pub fn epsilon_sweep(cfg: &RunConfig, mesh_n: usize, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    epsilons
        .iter()
        .map(|&e| Ok((e, check_gradient(cfg, mesh_n, e)?.max_relative_error())))
        .collect()
}

pub const FIELD_HEADER: &str = "triangle,centroid_x,centroid_y,a,r";

/// Writes both coefficient fields of sample `index` at the triangle
/// centroids (before clamping).
pub fn sample_field(cfg: &RunConfig, mesh_n: usize, index: u64, sink: &mut dyn Write) -> Result<SampleVector> {
    cfg.validate()?;
    let mesh = crate::mesh::TriMesh::build(mesh_n)?;
    let centroids: Vec<[f64; 2]> = (0..mesh.n_triangles()).map(|t| mesh.centroid(t)).collect();
    let a: FieldTable = cfg.diffusion()?.tabulate(&centroids);
    let r: FieldTable = cfg.reaction()?.tabulate(&centroids);
    let xi = stream(cfg, mesh_n, Lane::Field).draw(index, cfg.kl_terms);
    let (av, rv) = (a.evaluate(&xi.xi_a), r.evaluate(&xi.xi_r));
    writeln!(sink, "{FIELD_HEADER}")?;
    for (t, c) in centroids.iter().enumerate() {
        writeln!(
            sink,
            "{t},{},{},{},{}",
            super::run::format_float(c[0]),
            super::run::format_float(c[1]),
            super::run::format_float(av[t]),
            super::run::format_float(rv[t])
        )?;
    }
    sink.flush()?;
    Ok(xi)
}
