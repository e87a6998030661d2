//! P1 finite elements for `-div(a grad y) + r y^3 = u` with homogeneous
//! Dirichlet data, its linearized adjoint, and P1 -> P0 projection.
//!
//! Quadrature: the diffusion coefficient enters through the edge-midpoint
//! rule (three nodes per triangle), the reaction coefficient and every
//! term involving `y^3`, `y^2 p` or the target `y_D` through the six-point
//! degree-4 rule. State and adjoint use the same rules, so the discrete
//! adjoint is the exact derivative of the discrete reduced objective.

use crate::error::{Error, Result};
use crate::linalg::{dot, SymBandMatrix};
use crate::mesh::{TriMesh, DEGREE4_RULE, MIDPOINT_RULE};
use crate::space::{ControlField, StateField};

/// Lower bound applied to the diffusion coefficient before assembly.
pub const A_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearSolver {
    /// Banded Cholesky factorization.
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug)]
pub struct FemOptions {
    /// Absolute tolerance on the Euclidean norm of the algebraic residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub linear_solver: LinearSolver,
    /// Relative residual tolerance for the CG path.
    pub cg_rtol: f64,
}

impl Default for FemOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 30,
            linear_solver: LinearSolver::Cholesky,
            cg_rtol: 1e-12,
        }
    }
}

/// Coefficients sampled at quadrature nodes: `a` at the edge midpoints,
/// `r` at the degree-4 nodes.
#[derive(Clone, Debug)]
pub struct CoefficientSample {
    a: Vec<f64>,
    r: Vec<f64>,
    clamped: usize,
}

impl CoefficientSample {
    /// Clamps `a` below at [`A_FLOOR`] and `r` below at zero, counting
    /// every modified node.
    pub fn from_nodal(mesh: &TriMesh, mut a: Vec<f64>, mut r: Vec<f64>) -> Result<Self> {
        let na = mesh.n_triangles() * MIDPOINT_RULE.len();
        let nr = mesh.n_triangles() * DEGREE4_RULE.len();
        if a.len() != na {
            return Err(Error::LengthMismatch { expected: na, found: a.len() });
        }
        if r.len() != nr {
            return Err(Error::LengthMismatch { expected: nr, found: r.len() });
        }
        if let Some(i) = a.iter().chain(&r).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut clamped = 0;
        for v in &mut a {
            if *v < A_FLOOR {
                *v = A_FLOOR;
                clamped += 1;
            }
        }
        for v in &mut r {
            if *v < 0.0 {
                *v = 0.0;
                clamped += 1;
            }
        }
        Ok(Self { a, r, clamped })
    }

    pub fn constant(mesh: &TriMesh, a: f64, r: f64) -> Result<Self> {
        Self::from_nodal(
            mesh,
            vec![a; mesh.n_triangles() * MIDPOINT_RULE.len()],
            vec![r; mesh.n_triangles() * DEGREE4_RULE.len()],
        )
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r
    }

    pub fn clamp_count(&self) -> usize {
        self.clamped
    }

    /// Smallest diffusion value over the quadrature nodes.
    pub fn a_min(&self) -> f64 {
        self.a.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Target state tabulated at the degree-4 nodes.
#[derive(Clone, Debug)]
pub struct TargetField {
    values: Vec<f64>,
}

impl TargetField {
    pub fn from_fn(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            values: mesh.degree4_nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn from_state(mesh: &TriMesh, y: &StateField) -> Result<Self> {
        check_state(mesh, y)?;
        Ok(Self {
            values: values_at_degree4(mesh, &y.values),
        })
    }

    pub fn zero(mesh: &TriMesh) -> Self {
        Self {
            values: vec![0.0; mesh.degree4_nodes().len()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
    /// Residual norm at every evaluated iterate, starting from `y = 0`.
    pub residual_history: Vec<f64>,
}

fn check_state(mesh: &TriMesh, y: &StateField) -> Result<()> {
    if y.mesh != mesh.id() {
        return Err(Error::SpaceMismatch { expected: mesh.id(), found: y.mesh });
    }
    if y.values.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch { expected: mesh.n_vertices(), found: y.values.len() });
    }
    Ok(())
}

fn check_coeffs(mesh: &TriMesh, c: &CoefficientSample) -> Result<()> {
    let na = mesh.n_triangles() * MIDPOINT_RULE.len();
    if c.a.len() != na {
        return Err(Error::LengthMismatch { expected: na, found: c.a.len() });
    }
    Ok(())
}

/// Builds a state field from vertex values, checking the boundary.
pub fn state_field(mesh: &TriMesh, values: Vec<f64>) -> Result<StateField> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch { expected: mesh.n_vertices(), found: values.len() });
    }
    for (v, (&b, &x)) in mesh.boundary_mask().iter().zip(&values).enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite(v));
        }
        if b && x != 0.0 {
            return Err(Error::BoundaryNonzero { vertex: v, value: x });
        }
    }
    Ok(StateField { mesh: mesh.id(), values })
}

/// Nodal interpolant of `f`, with boundary values set to zero.
pub fn interpolate(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> StateField {
    let values = mesh
        .vertices()
        .iter()
        .zip(mesh.boundary_mask())
        .map(|(&x, &b)| if b { 0.0 } else { f(x) })
        .collect();
    StateField { mesh: mesh.id(), values }
}

fn to_full(mesh: &TriMesh, interior: &[f64]) -> StateField {
    let values = (0..mesh.n_vertices())
        .map(|v| mesh.dof(v).map_or(0.0, |d| interior[d]))
        .collect();
    StateField { mesh: mesh.id(), values }
}

fn to_interior(mesh: &TriMesh, full: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; mesh.n_dofs()];
    for (v, &val) in full.iter().enumerate() {
        if let Some(d) = mesh.dof(v) {
            x[d] = val;
        }
    }
    x
}

fn values_at_degree4(mesh: &TriMesh, full: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(mesh.n_triangles() * DEGREE4_RULE.len());
    for tri in mesh.triangles() {
        let yv = tri.map(|v| full[v]);
        for b in DEGREE4_RULE.barycentric {
            out.push(b[0] * yv[0] + b[1] * yv[1] + b[2] * yv[2]);
        }
    }
    out
}

/// `a`-weighted stiffness matrix on interior unknowns.
pub fn assemble_stiffness(mesh: &TriMesh, coeffs: &CoefficientSample) -> SymBandMatrix {
    let mut k = SymBandMatrix::zeros(mesh.n_dofs(), mesh.bandwidth());
    let nq = MIDPOINT_RULE.len();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a_int: f64 = coeffs.a[t * nq..(t + 1) * nq]
            .iter()
            .zip(MIDPOINT_RULE.weights)
            .map(|(a, w)| a * w)
            .sum::<f64>()
            * mesh.areas()[t];
        let g = &mesh.gradients()[t];
        for i in 0..3 {
            let Some(di) = mesh.dof(tri[i]) else { continue };
            for j in 0..=i {
                let Some(dj) = mesh.dof(tri[j]) else { continue };
                k.add(di, dj, a_int * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
            }
        }
    }
    k
}

/// Adds `int 3 r y^2 phi_i phi_j` and returns `int r y^3 phi_i` when
/// `residual` is requested.
fn add_reaction(
    mesh: &TriMesh,
    coeffs: &CoefficientSample,
    y_full: &[f64],
    jacobian: Option<&mut SymBandMatrix>,
    residual: Option<&mut [f64]>,
) {
    let nq = DEGREE4_RULE.len();
    let mut jac = jacobian;
    let mut res = residual;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let yv = tri.map(|v| y_full[v]);
        if yv == [0.0; 3] {
            continue;
        }
        let area = mesh.areas()[t];
        let dofs = tri.map(|v| mesh.dof(v));
        let mut local_j = [[0.0; 3]; 3];
        let mut local_r = [0.0; 3];
        for (q, (b, w)) in DEGREE4_RULE.barycentric.iter().zip(DEGREE4_RULE.weights).enumerate() {
            let r = coeffs.r[t * nq + q];
            if r == 0.0 {
                continue;
            }
            let yq = b[0] * yv[0] + b[1] * yv[1] + b[2] * yv[2];
            let wr = w * area * r;
            let c = 3.0 * wr * yq * yq;
            let n = wr * yq * yq * yq;
            for i in 0..3 {
                local_r[i] += n * b[i];
                for j in 0..=i {
                    local_j[i][j] += c * b[i] * b[j];
                }
            }
        }
        for i in 0..3 {
            let Some(di) = dofs[i] else { continue };
            if let Some(r) = res.as_deref_mut() {
                r[di] += local_r[i];
            }
            if let Some(k) = jac.as_deref_mut() {
                for j in 0..=i {
                    if let Some(dj) = dofs[j] {
                        k.add(di, dj, local_j[i][j]);
                    }
                }
            }
        }
    }
}

/// `int u phi_i` for a P0 control (exact: `u_T |T| / 3` per vertex).
pub fn load_vector(mesh: &TriMesh, u: &ControlField) -> Result<Vec<f64>> {
    mesh.control_space().ensure_member(u)?;
    let mut b = vec![0.0; mesh.n_dofs()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let c = u.values()[t] * mesh.areas()[t] / 3.0;
        for &v in tri {
            if let Some(d) = mesh.dof(v) {
                b[d] += c;
            }
        }
    }
    Ok(b)
}

fn linear_solve(a: &SymBandMatrix, rhs: &[f64], opts: &FemOptions) -> Result<Vec<f64>> {
    match opts.linear_solver {
        LinearSolver::Cholesky => Ok(a.cholesky()?.solve(rhs)),
        LinearSolver::ConjugateGradient => a.solve_cg(rhs, opts.cg_rtol, 20 * a.dim().max(10)),
    }
}

/// Solves the semilinear state equation by undamped Newton from `y = 0`.
///
/// Non-convergence is reported through [`NewtonReport::converged`]; linear
/// algebra failures are errors.
pub fn solve_state(
    mesh: &TriMesh,
    coeffs: &CoefficientSample,
    u: &ControlField,
    opts: &FemOptions,
) -> Result<(StateField, NewtonReport)> {
    check_coeffs(mesh, coeffs)?;
    let b = load_vector(mesh, u)?;
    let k = assemble_stiffness(mesh, coeffs);
    let mut y = vec![0.0; mesh.n_dofs()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_newton_iters.max(1) {
        iterations = it;
        let y_full = to_full(mesh, &y);
        let mut res = k.mul_vec(&y);
        add_reaction(mesh, coeffs, &y_full.values, None, Some(&mut res));
        for (r, bi) in res.iter_mut().zip(&b) {
            *r -= bi;
        }
        let rn = dot(&res, &res).sqrt();
        history.push(rn);
        if rn <= opts.newton_tol {
            converged = true;
            break;
        }
        if it == opts.max_newton_iters {
            break;
        }
        let mut jac = k.clone();
        add_reaction(mesh, coeffs, &y_full.values, Some(&mut jac), None);
        for r in &mut res {
            *r = -*r;
        }
        let delta = linear_solve(&jac, &res, opts)?;
        for (yi, d) in y.iter_mut().zip(&delta) {
            *yi += d;
        }
    }
    let report = NewtonReport {
        iterations,
        final_residual_norm: *history.last().unwrap_or(&0.0),
        converged,
        residual_history: history,
    };
    Ok((to_full(mesh, &y), report))
}

/// Solves `-div(a grad p) + 3 r y^2 p = y_D - y`, `p = 0` on the boundary.
pub fn solve_adjoint(
    mesh: &TriMesh,
    coeffs: &CoefficientSample,
    y: &StateField,
    target: &TargetField,
    opts: &FemOptions,
) -> Result<StateField> {
    check_coeffs(mesh, coeffs)?;
    check_state(mesh, y)?;
    let mut a = assemble_stiffness(mesh, coeffs);
    add_reaction(mesh, coeffs, &y.values, Some(&mut a), None);
    let yq = values_at_degree4(mesh, &y.values);
    let nq = DEGREE4_RULE.len();
    let mut rhs = vec![0.0; mesh.n_dofs()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.areas()[t];
        let mut local = [0.0; 3];
        for (q, (b, w)) in DEGREE4_RULE.barycentric.iter().zip(DEGREE4_RULE.weights).enumerate() {
            let s = w * area * (target.values[t * nq + q] - yq[t * nq + q]);
            for i in 0..3 {
                local[i] += s * b[i];
            }
        }
        for i in 0..3 {
            if let Some(d) = mesh.dof(tri[i]) {
                rhs[d] += local[i];
            }
        }
    }
    let p = linear_solve(&a, &rhs, opts)?;
    Ok(to_full(mesh, &p))
}

/// Cellwise mean of a P1 field: the average of its three vertex values.
pub fn project_p1_to_p0(mesh: &TriMesh, v: &StateField) -> Result<ControlField> {
    check_state(mesh, v)?;
    let values = mesh
        .triangles()
        .iter()
        .map(|t| (v.values[t[0]] + v.values[t[1]] + v.values[t[2]]) / 3.0)
        .collect();
    Ok(mesh.control_space().wrap_unchecked(values))
}

/// L2 projection of a function onto P0 (cell means by the degree-4 rule).
pub fn project_fn_p0(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> ControlField {
    let nq = DEGREE4_RULE.len();
    let pts = mesh.degree4_nodes();
    let values = (0..mesh.n_triangles())
        .map(|t| {
            (0..nq)
                .map(|q| DEGREE4_RULE.weights[q] * f(pts[t * nq + q]))
                .sum()
        })
        .collect();
    mesh.control_space().wrap_unchecked(values)
}

/// `||v||_{L2}` of a P1 field (midpoint rule, exact for `v^2`).
pub fn l2_norm(mesh: &TriMesh, v: &StateField) -> Result<f64> {
    check_state(mesh, v)?;
    let mut s = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let x = tri.map(|i| v.values[i]);
        let m = [(x[0] + x[1]) / 2.0, (x[1] + x[2]) / 2.0, (x[0] + x[2]) / 2.0];
        s += mesh.areas()[t] * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) / 3.0;
    }
    Ok(s.sqrt())
}

/// `||v - target||_{L2}` by the degree-4 rule.
pub fn l2_distance(mesh: &TriMesh, v: &StateField, target: &TargetField) -> Result<f64> {
    check_state(mesh, v)?;
    let vq = values_at_degree4(mesh, &v.values);
    Ok(weighted_square_sum(mesh, |i| vq[i] - target.values[i]).sqrt())
}

/// `||target||_{L2}` by the degree-4 rule.
pub fn target_norm(mesh: &TriMesh, target: &TargetField) -> f64 {
    weighted_square_sum(mesh, |i| target.values[i]).sqrt()
}

fn weighted_square_sum(mesh: &TriMesh, f: impl Fn(usize) -> f64) -> f64 {
    let nq = DEGREE4_RULE.len();
    let mut s = 0.0;
    for t in 0..mesh.n_triangles() {
        let mut local = 0.0;
        for q in 0..nq {
            let d = f(t * nq + q);
            local += DEGREE4_RULE.weights[q] * d * d;
        }
        s += mesh.areas()[t] * local;
    }
    s
}

/// `||v - f||_{L2}` for an analytic `f`, by the degree-4 rule.
pub fn l2_error(mesh: &TriMesh, v: &StateField, f: impl Fn([f64; 2]) -> f64) -> Result<f64> {
    l2_distance(mesh, v, &TargetField::from_fn(mesh, f))
}

/// Interior-vector view of a state field, in dof order.
pub fn interior_values(mesh: &TriMesh, v: &StateField) -> Result<Vec<f64>> {
    check_state(mesh, v)?;
    Ok(to_interior(mesh, &v.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::InnerProductSpace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sine(x: [f64; 2]) -> f64 {
        (PI * x[0]).sin() * (PI * x[1]).sin()
    }

    #[test]
    fn zero_control_gives_zero_state_in_one_iteration() {
        let mesh = TriMesh::build(8).unwrap();
        let c = CoefficientSample::constant(&mesh, 0.7, 2.0).unwrap();
        let (y, rep) = solve_state(&mesh, &c, &mesh.control_space().zero(), &FemOptions::default()).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn manufactured_poisson_error_is_second_order() {
        let err = |n| {
            let mesh = TriMesh::build(n).unwrap();
            let c = CoefficientSample::constant(&mesh, 1.0, 0.0).unwrap();
            let u = project_fn_p0(&mesh, |x| 2.0 * PI * PI * sine(x));
            let (y, rep) = solve_state(&mesh, &c, &u, &FemOptions::default()).unwrap();
            assert!(rep.converged);
            l2_error(&mesh, &y, sine).unwrap()
        };
        let (e8, e16) = (err(8), err(16));
        assert!(e16 < 1e-2);
        let ratio = e8 / e16;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn boundary_values_are_exact_zeros() {
        let mesh = TriMesh::build(6).unwrap();
        let c = CoefficientSample::constant(&mesh, 1.0, 1.0).unwrap();
        let (y, _) = solve_state(&mesh, &c, &mesh.control_space().constant(3.0), &FemOptions::default()).unwrap();
        for (v, &b) in mesh.boundary_mask().iter().enumerate() {
            if b {
                assert_eq!(y.values()[v], 0.0);
            }
        }
        assert!(state_field(&mesh, y.values().to_vec()).is_ok());
    }

    #[test]
    fn poincare_bound_on_constant_source() {
        let mesh = TriMesh::build(16).unwrap();
        let c = CoefficientSample::constant(&mesh, 1.0, 1.0).unwrap();
        let u = mesh.control_space().constant(1.0);
        let (y, _) = solve_state(&mesh, &c, &u, &FemOptions::default()).unwrap();
        let cp2 = 1.0 / (2.0 * PI * PI);
        assert!(l2_norm(&mesh, &y).unwrap() <= cp2 * 1.0);
    }

    #[test]
    fn cg_and_cholesky_paths_agree() {
        let mesh = TriMesh::build(12).unwrap();
        let c = CoefficientSample::constant(&mesh, 0.4, 5.0).unwrap();
        let u = project_fn_p0(&mesh, |x| 20.0 * x[0] * (1.0 - x[1]));
        let (y1, _) = solve_state(&mesh, &c, &u, &FemOptions::default()).unwrap();
        let opts = FemOptions { linear_solver: LinearSolver::ConjugateGradient, ..Default::default() };
        let (y2, _) = solve_state(&mesh, &c, &u, &opts).unwrap();
        for (a, b) in y1.values().iter().zip(y2.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn newton_handles_strong_nonlinearity() {
        let mesh = TriMesh::build(10).unwrap();
        let c = CoefficientSample::constant(&mesh, 0.05, 50.0).unwrap();
        let u = mesh.control_space().constant(40.0);
        let (_, rep) = solve_state(&mesh, &c, &u, &FemOptions::default()).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(rep.iterations > 2);
        // the first undamped step overshoots, after that the decrease is monotone
        assert!(rep.residual_history[1..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let mesh = TriMesh::build(10).unwrap();
        let c = CoefficientSample::constant(&mesh, 0.05, 50.0).unwrap();
        let u = mesh.control_space().constant(40.0);
        let opts = FemOptions { max_newton_iters: 2, ..Default::default() };
        let (_, rep) = solve_state(&mesh, &c, &u, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn adjoint_with_matching_target_is_zero() {
        let mesh = TriMesh::build(8).unwrap();
        let c = CoefficientSample::constant(&mesh, 1.0, 1.0).unwrap();
        let (y, _) = solve_state(&mesh, &c, &mesh.control_space().constant(1.0), &FemOptions::default()).unwrap();
        let target = TargetField::from_state(&mesh, &y).unwrap();
        let p = solve_adjoint(&mesh, &c, &y, &target, &FemOptions::default()).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn adjoint_reduces_to_poisson() {
        let mesh = TriMesh::build(32).unwrap();
        let c = CoefficientSample::constant(&mesh, 1.0, 0.0).unwrap();
        let y = interpolate(&mesh, |_| 0.0);
        let target = TargetField::from_fn(&mesh, |x| 2.0 * PI * PI * sine(x));
        let p = solve_adjoint(&mesh, &c, &y, &target, &FemOptions::default()).unwrap();
        assert!(l2_error(&mesh, &p, sine).unwrap() < 2e-3);
    }

    #[test]
    fn projection_examples() {
        let mesh = TriMesh::build(4).unwrap();
        let zero = interpolate(&mesh, |_| 0.0);
        assert!(project_p1_to_p0(&mesh, &zero).unwrap().values().iter().all(|&v| v == 0.0));
        // an interior triangle with chosen vertex values (0, 1, 2)
        let (i, j, n) = (1, 1, 4);
        let t = 2 * (j * n + i);
        let tri = mesh.triangles()[t];
        let mut vals = vec![0.0; mesh.n_vertices()];
        vals[tri[1]] = 1.0;
        vals[tri[2]] = 2.0;
        let v = state_field(&mesh, vals).unwrap();
        assert!((project_p1_to_p0(&mesh, &v).unwrap().values()[t] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_preserves_constants() {
        // constants violate the boundary condition, so use the raw field
        let mesh = TriMesh::build(3).unwrap();
        let v = StateField { mesh: mesh.id(), values: vec![2.5; mesh.n_vertices()] };
        assert!(project_p1_to_p0(&mesh, &v).unwrap().values().iter().all(|&x| (x - 2.5).abs() < 1e-15));
    }

    #[test]
    fn rejects_boundary_violations_and_foreign_fields() {
        let mesh = TriMesh::build(3).unwrap();
        assert!(matches!(state_field(&mesh, vec![1.0; mesh.n_vertices()]), Err(Error::BoundaryNonzero { .. })));
        let other = TriMesh::build(4).unwrap();
        let v = interpolate(&other, sine);
        assert!(matches!(project_p1_to_p0(&mesh, &v), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn stiffness_is_positive_definite_on_random_forms() {
        let mesh = TriMesh::build(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..mesh.n_triangles() * 3).map(|_| rng.random_range(0.01..2.0)).collect();
        let c = CoefficientSample::from_nodal(&mesh, a, vec![0.0; mesh.n_triangles() * 6]).unwrap();
        let k = assemble_stiffness(&mesh, &c);
        for _ in 0..50 {
            let x: Vec<f64> = (0..k.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..k.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(k.quadratic_form(&x) > 0.0);
            assert!((dot(&x, &k.mul_vec(&y)) - dot(&y, &k.mul_vec(&x))).abs() < 1e-11);
        }
        assert!(k.cholesky().is_ok());
    }

    #[test]
    fn clamping_counts_violations() {
        let mesh = TriMesh::build(2).unwrap();
        let mut a = vec![1.0; 24];
        a[3] = -0.2;
        let mut r = vec![0.5; 48];
        r[0] = -1.0;
        r[7] = -1e-9;
        let c = CoefficientSample::from_nodal(&mesh, a, r).unwrap();
        assert_eq!(c.clamp_count(), 3);
        assert_eq!(c.a_min(), A_FLOOR);
        assert!(c.r_values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn projection_is_adjoint_to_p0_pairing() {
        let mesh = TriMesh::build(6).unwrap();
        let v = interpolate(&mesh, |x| x[0] * x[1] * (1.0 - x[0]) + x[1].sin());
        let w = project_fn_p0(&mesh, |x| (3.0 * x[0]).cos() - x[1]);
        let pv = project_p1_to_p0(&mesh, &v).unwrap();
        let lhs = mesh.control_space().inner_l2(&pv, &w).unwrap();
        // int v w over each triangle: v linear, w constant -> |T| w_T mean(v)
        let mut rhs = 0.0;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let vq: f64 = MIDPOINT_RULE
                .barycentric
                .iter()
                .zip(MIDPOINT_RULE.weights)
                .map(|(b, wq)| wq * (b[0] * v.values()[tri[0]] + b[1] * v.values()[tri[1]] + b[2] * v.values()[tri[2]]))
                .sum();
            rhs += mesh.areas()[t] * w.values()[t] * vq;
        }
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
