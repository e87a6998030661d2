//! Discrete function spaces: piecewise-constant controls and
//! piecewise-linear states.
//!
//! The control space carries a mass-weighted inner product
//! `<u, v> = sum_T |T| u_T v_T`, i.e. the exact L2 inner product of P0
//! functions. Everything the optimizers do (steps, prox, stationarity
//! measures) is expressed through [`InnerProductSpace`].

use std::sync::Arc;

use crate::error::{Error, Result};

/// Identifies the discretization a field belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceId {
    /// Uniform unit-square mesh with the given number of divisions per side.
    Mesh(usize),
    /// Weighted coordinate space not attached to a mesh.
    Coordinates(usize),
}

/// Abstract real inner-product space used by the optimization loops.
pub trait InnerProductSpace: Sync {
    type Vector: Clone + Send + Sync;

    fn inner(&self, a: &Self::Vector, b: &Self::Vector) -> f64;

    /// Returns `alpha * x + beta * y`.
    fn combine(&self, alpha: f64, x: &Self::Vector, beta: f64, y: &Self::Vector) -> Self::Vector;

    fn zero(&self) -> Self::Vector;

    fn norm(&self, a: &Self::Vector) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    fn distance(&self, a: &Self::Vector, b: &Self::Vector) -> f64 {
        self.norm(&self.combine(1.0, a, -1.0, b))
    }

    /// Arithmetic mean of a nonempty list of vectors, summed in order.
    fn mean(&self, vectors: &[Self::Vector]) -> Self::Vector {
        let mut acc = self.zero();
        for v in vectors {
            acc = self.combine(1.0, &acc, 1.0, v);
        }
        let scale = 1.0 / vectors.len().max(1) as f64;
        self.combine(scale, &acc, 0.0, &self.zero())
    }
}

/// Space of cellwise-constant functions with cell measures as weights.
#[derive(Clone, Debug)]
pub struct ControlSpace {
    id: SpaceId,
    weights: Arc<[f64]>,
}

impl ControlSpace {
    pub(crate) fn with_weights(id: SpaceId, weights: Vec<f64>) -> Self {
        Self {
            id,
            weights: weights.into(),
        }
    }

    /// Coordinate space `R^n` where every cell has the same weight.
    pub fn coordinates(n: usize, weight: f64) -> Self {
        Self::with_weights(SpaceId::Coordinates(n), vec![weight; n])
    }

    pub fn id(&self) -> SpaceId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Cell measures `|T|`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn field(&self, values: Vec<f64>) -> Result<ControlField> {
        if values.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(ControlField {
            space: self.id,
            values,
        })
    }

    pub fn constant(&self, c: f64) -> ControlField {
        ControlField {
            space: self.id,
            values: vec![c; self.dim()],
        }
    }

    /// Builds a field cellwise from a map over existing values. The caller
    /// is responsible for finiteness.
    pub(crate) fn map(&self, u: &ControlField, f: impl Fn(usize, f64) -> f64) -> ControlField {
        self.check(u);
        ControlField {
            space: self.id,
            values: u.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect(),
        }
    }

    pub(crate) fn wrap_unchecked(&self, values: Vec<f64>) -> ControlField {
        debug_assert_eq!(values.len(), self.dim());
        ControlField {
            space: self.id,
            values,
        }
    }

    fn check(&self, u: &ControlField) {
        assert_eq!(u.space, self.id, "control field from a different space");
    }

    pub fn ensure_member(&self, u: &ControlField) -> Result<()> {
        if u.space != self.id {
            return Err(Error::SpaceMismatch {
                expected: self.id,
                found: u.space,
            });
        }
        Ok(())
    }

    /// Mass-weighted L2 inner product `sum_T |T| u_T v_T`.
    pub fn inner_l2(&self, u: &ControlField, v: &ControlField) -> Result<f64> {
        self.ensure_member(u)?;
        self.ensure_member(v)?;
        Ok(self.weighted_dot(&u.values, &v.values))
    }

    /// `sum_T |T| |u_T|`.
    pub fn norm_l1(&self, u: &ControlField) -> Result<f64> {
        self.ensure_member(u)?;
        Ok(self
            .weights
            .iter()
            .zip(&u.values)
            .map(|(w, v)| w * v.abs())
            .sum())
    }

    fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

impl InnerProductSpace for ControlSpace {
    type Vector = ControlField;

    fn inner(&self, a: &ControlField, b: &ControlField) -> f64 {
        self.check(a);
        self.check(b);
        self.weighted_dot(&a.values, &b.values)
    }

    fn combine(&self, alpha: f64, x: &ControlField, beta: f64, y: &ControlField) -> ControlField {
        self.check(x);
        self.check(y);
        ControlField {
            space: self.id,
            values: x
                .values
                .iter()
                .zip(&y.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    fn zero(&self) -> ControlField {
        self.constant(0.0)
    }
}

/// Piecewise-constant control, one value per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlField {
    space: SpaceId,
    values: Vec<f64>,
}

impl ControlField {
    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Piecewise-linear field given by its vertex values; zero on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    pub(crate) mesh: SpaceId,
    pub(crate) values: Vec<f64>,
}

impl StateField {
    pub fn mesh(&self) -> SpaceId {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Free-function forms of the control-space operations.
pub fn inner_l2_p0(space: &ControlSpace, u: &ControlField, v: &ControlField) -> Result<f64> {
    space.inner_l2(u, v)
}

pub fn norm_l1_p0(space: &ControlSpace, u: &ControlField) -> Result<f64> {
    space.norm_l1(u)
}
