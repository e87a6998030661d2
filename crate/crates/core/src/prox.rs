//! Proximity operators for `h = lambda1 ||.||_{L1} + indicator(box)` and the
//! prox-based stationarity measure.

use crate::error::{Error, Result};
use crate::space::{ControlField, ControlSpace, InnerProductSpace};

/// Pointwise bounds `lower <= u <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub enum BoxSet {
    Uniform { lower: f64, upper: f64 },
    PerCell { lower: Vec<f64>, upper: Vec<f64> },
}

impl BoxSet {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::InvalidArgument(format!("empty box [{lower}, {upper}]")));
        }
        Ok(Self::Uniform { lower, upper })
    }

    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::uniform(-half_width, half_width)
    }

    pub fn unbounded() -> Self {
        Self::Uniform {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn per_cell(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch { expected: lower.len(), found: upper.len() });
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument(format!("empty box at cell {i}")));
        }
        Ok(Self::PerCell { lower, upper })
    }

    #[inline]
    pub fn bounds(&self, cell: usize) -> (f64, f64) {
        match self {
            BoxSet::Uniform { lower, upper } => (*lower, *upper),
            BoxSet::PerCell { lower, upper } => (lower[cell], upper[cell]),
        }
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.iter().enumerate().all(|(i, &v)| {
            let (lo, hi) = self.bounds(i);
            lo <= v && v <= hi
        })
    }

    pub fn project(&self, space: &ControlSpace, u: &ControlField) -> ControlField {
        space.map(u, |i, v| {
            let (lo, hi) = self.bounds(i);
            v.clamp(lo, hi)
        })
    }

    fn check_len(&self, n: usize) -> Result<()> {
        match self {
            BoxSet::PerCell { lower, .. } if lower.len() != n => {
                Err(Error::LengthMismatch { expected: n, found: lower.len() })
            }
            _ => Ok(()),
        }
    }
}

/// Which parts of `h` are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProxVariant {
    L1Box,
    BoxOnly,
    L1Only,
    None,
}

/// Nonsmooth term of a composite objective.
pub trait ProximalTerm<S: InnerProductSpace>: Sync {
    /// `h(v)`, `+inf` outside the domain.
    fn value(&self, space: &S, v: &S::Vector) -> f64;
    /// `argmin_v h(v) + ||v - z||^2 / (2t)`.
    fn prox(&self, space: &S, z: &S::Vector, t: f64) -> S::Vector;
}

/// `h = 0`: the prox is the identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoProx;

impl<S: InnerProductSpace> ProximalTerm<S> for NoProx {
    fn value(&self, _: &S, _: &S::Vector) -> f64 {
        0.0
    }
    fn prox(&self, _: &S, z: &S::Vector, _: f64) -> S::Vector {
        z.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProxSpec {
    pub lambda1: f64,
    pub box_set: BoxSet,
    pub variant: ProxVariant,
}

impl ProxSpec {
    pub fn l1_box(lambda1: f64, box_set: BoxSet) -> Result<Self> {
        check_lambda(lambda1)?;
        Ok(Self { lambda1, box_set, variant: ProxVariant::L1Box })
    }

    pub fn box_only(box_set: BoxSet) -> Self {
        Self { lambda1: 0.0, box_set, variant: ProxVariant::BoxOnly }
    }

    pub fn l1_only(lambda1: f64) -> Result<Self> {
        check_lambda(lambda1)?;
        Ok(Self { lambda1, box_set: BoxSet::unbounded(), variant: ProxVariant::L1Only })
    }

    pub fn none() -> Self {
        Self { lambda1: 0.0, box_set: BoxSet::unbounded(), variant: ProxVariant::None }
    }

    fn has_l1(&self) -> bool {
        matches!(self.variant, ProxVariant::L1Box | ProxVariant::L1Only)
    }

    fn has_box(&self) -> bool {
        matches!(self.variant, ProxVariant::L1Box | ProxVariant::BoxOnly)
    }

    /// Scalar prox of `lambda1 |v| + indicator([lo, hi])`: soft threshold
    /// by `t lambda1`, then clamp. `|z| = t lambda1` maps to zero.
    #[inline]
    pub fn scalar_prox(&self, cell: usize, z: f64, t: f64) -> f64 {
        let mut v = z;
        if self.has_l1() {
            let shrink = z.abs() - t * self.lambda1;
            v = if shrink > 0.0 { shrink.copysign(z) } else { 0.0 };
        }
        if self.has_box() {
            let (lo, hi) = self.box_set.bounds(cell);
            v = v.clamp(lo, hi);
        }
        v
    }

    /// Cellwise closed form of `prox_{t h}(z)`.
    pub fn prox_l1_box(&self, space: &ControlSpace, z: &ControlField, t: f64) -> Result<ControlField> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {t}")));
        }
        space.ensure_member(z)?;
        self.box_set.check_len(space.dim())?;
        Ok(space.map(z, |i, v| self.scalar_prox(i, v, t)))
    }

    /// `||u - prox_h(u - g)||` with unit step.
    pub fn stationarity_measure(&self, space: &ControlSpace, u: &ControlField, g: &ControlField) -> Result<f64> {
        space.ensure_member(u)?;
        space.ensure_member(g)?;
        let z = space.combine(1.0, u, -1.0, g);
        let p = self.prox_l1_box(space, &z, 1.0)?;
        Ok(space.distance(u, &p))
    }
}

fn check_lambda(lambda1: f64) -> Result<()> {
    if lambda1 >= 0.0 && lambda1.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda1 must be nonnegative, got {lambda1}")))
    }
}

impl ProximalTerm<ControlSpace> for ProxSpec {
    fn value(&self, space: &ControlSpace, v: &ControlField) -> f64 {
        if self.has_box() && !self.box_set.contains(v.values()) {
            return f64::INFINITY;
        }
        if self.has_l1() {
            self.lambda1 * space.norm_l1(v).expect("field from this space")
        } else {
            0.0
        }
    }

    fn prox(&self, space: &ControlSpace, z: &ControlField, t: f64) -> ControlField {
        self.prox_l1_box(space, z, t).expect("valid prox arguments")
    }
}

/// Free-function form of [`ProxSpec::prox_l1_box`].
pub fn prox_l1_box(space: &ControlSpace, z: &ControlField, t: f64, spec: &ProxSpec) -> Result<ControlField> {
    spec.prox_l1_box(space, z, t)
}

/// Free-function form of [`ProxSpec::stationarity_measure`].
pub fn stationarity_measure(space: &ControlSpace, u: &ControlField, g_avg: &ControlField, spec: &ProxSpec) -> Result<f64> {
    spec.stationarity_measure(space, u, g_avg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_cell() -> ControlSpace {
        ControlSpace::coordinates(1, 1.0)
    }

    fn reference_prox() -> ProxSpec {
        ProxSpec::l1_box(0.008, BoxSet::symmetric(0.5).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = one_cell();
        let p = reference_prox();
        for (z, expect) in [(0.3, 0.292), (0.004, 0.0), (10.0, 0.5), (0.0, 0.0), (-0.3, -0.292), (-7.0, -0.5)] {
            let out = p.prox_l1_box(&s, &s.constant(z), 1.0).unwrap();
            assert!((out.values()[0] - expect).abs() < 1e-15, "z = {z}");
        }
        // closed dead zone
        assert_eq!(p.scalar_prox(0, 0.008, 1.0), 0.0);
        assert_eq!(p.scalar_prox(0, -0.004, 2.0), 0.0);
    }

    #[test]
    fn asymmetric_box_clamps_after_threshold() {
        let s = ControlSpace::coordinates(3, 1.0);
        let spec = ProxSpec::l1_box(0.1, BoxSet::per_cell(vec![0.2, -1.0, -0.3], vec![1.0, -0.5, 0.3]).unwrap()).unwrap();
        let out = spec.prox_l1_box(&s, &s.field(vec![0.05, 0.0, 2.0]).unwrap(), 1.0).unwrap();
        assert_eq!(out.values(), &[0.2, -0.5, 0.3]);
    }

    #[test]
    fn variants() {
        let s = one_cell();
        let z = s.constant(0.7);
        let b = ProxSpec::box_only(BoxSet::symmetric(0.5).unwrap());
        assert_eq!(b.prox_l1_box(&s, &z, 3.0).unwrap().values()[0], 0.5);
        let l = ProxSpec::l1_only(0.1).unwrap();
        assert!((l.prox_l1_box(&s, &z, 2.0).unwrap().values()[0] - 0.5).abs() < 1e-15);
        assert_eq!(ProxSpec::none().prox_l1_box(&s, &z, 9.0).unwrap(), z);
        assert_eq!(b.value(&s, &z), f64::INFINITY);
        assert!((l.value(&s, &z) - 0.07).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        let s = one_cell();
        assert!(reference_prox().prox_l1_box(&s, &s.zero(), 0.0).is_err());
        assert!(ProxSpec::l1_only(-1.0).is_err());
        assert!(BoxSet::uniform(1.0, 0.0).is_err());
    }

    #[test]
    fn stationarity_examples() {
        let s = ControlSpace::coordinates(4, 0.25);
        let p = reference_prox();
        let u = s.field(vec![0.1, -0.2, 0.3, 0.0]).unwrap();
        let direct = s.distance(&u, &p.prox_l1_box(&s, &u, 1.0).unwrap());
        assert_eq!(p.stationarity_measure(&s, &u, &s.zero()).unwrap(), direct);
        // u = 0.25, gradient exactly cancels to a fixed point: 0.25 = prox(0.25 - g) for g = -0.008
        let u = s.constant(0.25);
        let g = s.constant(-0.008);
        assert!(p.stationarity_measure(&s, &u, &g).unwrap() < 1e-15);
        // smooth case lambda1 = 0: r = 0 at a zero of the gradient
        let q = ProxSpec::box_only(BoxSet::symmetric(0.5).unwrap());
        assert_eq!(q.stationarity_measure(&s, &u, &s.zero()).unwrap(), 0.0);
    }
}
