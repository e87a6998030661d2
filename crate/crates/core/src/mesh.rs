//! Uniform triangulation of the unit square and triangle quadrature.

use crate::error::{Error, Result};
use crate::space::{ControlSpace, SpaceId};

/// Quadrature rule on the reference triangle in barycentric form.
/// Weights sum to one and are multiplied by `|T|`.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureRule {
    pub barycentric: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Edge-midpoint rule, exact for polynomials of degree 2.
pub const MIDPOINT_RULE: QuadratureRule = QuadratureRule {
    barycentric: &[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

// 20-digit published values
#[allow(clippy::excessive_precision)]
const D4_A: f64 = 0.445_948_490_915_964_886_32;
const D4_B: f64 = 1.0 - 2.0 * D4_A;
#[allow(clippy::excessive_precision)]
const D4_C: f64 = 0.091_576_213_509_770_743_46;
const D4_D: f64 = 1.0 - 2.0 * D4_C;
#[allow(clippy::excessive_precision)]
const D4_WA: f64 = 0.223_381_589_678_011_465_70;
#[allow(clippy::excessive_precision)]
const D4_WC: f64 = 0.109_951_743_655_321_867_64;

/// Six-point symmetric rule, exact for polynomials of degree 4.
pub const DEGREE4_RULE: QuadratureRule = QuadratureRule {
    barycentric: &[
        [D4_A, D4_A, D4_B],
        [D4_A, D4_B, D4_A],
        [D4_B, D4_A, D4_A],
        [D4_C, D4_C, D4_D],
        [D4_C, D4_D, D4_C],
        [D4_D, D4_C, D4_C],
    ],
    weights: &[D4_WA, D4_WA, D4_WA, D4_WC, D4_WC, D4_WC],
};

/// Conforming triangulation of `(0,1)^2` built from an `N x N` grid of
/// squares, each split along its bottom-left to top-right diagonal.
///
/// Vertex `(i, j)` (column `i`, row `j`) has index `j * (N + 1) + i`.
/// Square `(i, j)` yields triangles `2 (j N + i)` (below the diagonal) and
/// `2 (j N + i) + 1` (above it), both counter-clockwise.
#[derive(Clone, Debug)]
pub struct TriMesh {
    n_divisions: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    areas: Vec<f64>,
    /// Constant gradients of the three P1 basis functions per triangle.
    gradients: Vec<[[f64; 2]; 3]>,
    /// Vertex -> interior unknown index.
    dof_of_vertex: Vec<Option<usize>>,
    n_dofs: usize,
    control_space: ControlSpace,
    midpoints: Vec<[f64; 2]>,
    degree4_points: Vec<[f64; 2]>,
}

impl TriMesh {
    pub fn build(n_divisions: usize) -> Result<Self> {
        if n_divisions == 0 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one division".into(),
            ));
        }
        let n = n_divisions;
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let mut dof_of_vertex = vec![None; vertices.len()];
        let mut n_dofs = 0;
        for (v, b) in boundary.iter().enumerate() {
            if !b {
                dof_of_vertex[v] = Some(n_dofs);
                n_dofs += 1;
            }
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut gradients = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let [p0, p1, p2] = tri.map(|v| vertices[v]);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            areas.push(0.5 * det);
            // grad lambda_k = rot90(opposite edge) / det
            let g = |a: [f64; 2], b: [f64; 2]| [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
            gradients.push([g(p1, p2), g(p2, p0), g(p0, p1)]);
        }
        let control_space = ControlSpace::with_weights(SpaceId::Mesh(n), areas.clone());
        let mut mesh = Self {
            n_divisions: n,
            vertices,
            triangles,
            boundary,
            areas,
            gradients,
            dof_of_vertex,
            n_dofs,
            control_space,
            midpoints: Vec::new(),
            degree4_points: Vec::new(),
        };
        mesh.midpoints = mesh.physical_points(&MIDPOINT_RULE);
        mesh.degree4_points = mesh.physical_points(&DEGREE4_RULE);
        Ok(mesh)
    }

    fn physical_points(&self, rule: &QuadratureRule) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(self.triangles.len() * rule.len());
        for tri in &self.triangles {
            let [p0, p1, p2] = tri.map(|v| self.vertices[v]);
            for b in rule.barycentric {
                pts.push([
                    b[0] * p0[0] + b[1] * p1[0] + b[2] * p2[0],
                    b[0] * p0[1] + b[1] * p1[1] + b[2] * p2[1],
                ]);
            }
        }
        pts
    }

    pub fn id(&self) -> SpaceId {
        SpaceId::Mesh(self.n_divisions)
    }

    pub fn n_divisions(&self) -> usize {
        self.n_divisions
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub(crate) fn gradients(&self) -> &[[[f64; 2]; 3]] {
        &self.gradients
    }

    pub(crate) fn dof(&self, vertex: usize) -> Option<usize> {
        self.dof_of_vertex[vertex]
    }

    /// Number of interior vertices (unknowns after Dirichlet elimination).
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Half-bandwidth of the interior system in row-major numbering.
    pub(crate) fn bandwidth(&self) -> usize {
        // neighbours (i+1, j+1) and (i-1, j-1) sit N dofs apart
        self.n_divisions
    }

    /// Largest triangle diameter.
    pub fn h_max(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let p = t.map(|v| self.vertices[v]);
                let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                d(p[0], p[1]).max(d(p[1], p[2])).max(d(p[0], p[2]))
            })
            .fold(0.0, f64::max)
    }

    pub fn control_space(&self) -> &ControlSpace {
        &self.control_space
    }

    pub fn centroid(&self, triangle: usize) -> [f64; 2] {
        let p = self.triangles[triangle].map(|v| self.vertices[v]);
        [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ]
    }

    /// Physical edge-midpoint quadrature nodes, three per triangle.
    pub fn midpoint_nodes(&self) -> &[[f64; 2]] {
        &self.midpoints
    }

    /// Physical degree-4 quadrature nodes, six per triangle.
    pub fn degree4_nodes(&self) -> &[[f64; 2]] {
        &self.degree4_points
    }
}
