//! Truncated Karhunen-Loeve expansions on the unit square and
//! counter-based sampling of the uniform expansion coordinates.
//!
//! Samples are generated with ChaCha20 (`rand_chacha::ChaCha20Rng`): the
//! key is derived from the seed with `seed_from_u64`, the ChaCha stream
//! number selects an independent lane, and sample `k` occupies the fixed
//! block of `4 m` 32-bit words starting at word `4 m k`. A value therefore
//! depends only on `(seed, lane, k)`, never on how many other samples were
//! drawn before it or on which thread drew it.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Half-width of the uniform coordinate distribution, `sqrt(0.5)`.
pub const UNIFORM_HALF_WIDTH: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One term of the expansion: eigenvalue with the cosine index pair
/// `(j, k)` of the eigenfunction `2 cos(j pi x2) cos(k pi x1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenpair {
    pub eigenvalue: f64,
    pub j: usize,
    pub k: usize,
}

impl Eigenpair {
    pub fn eigenfunction(&self, x: [f64; 2]) -> f64 {
        use std::f64::consts::PI;
        2.0 * (self.j as f64 * PI * x[1]).cos() * (self.k as f64 * PI * x[0]).cos()
    }
}

/// `a(x, xi) = mean + sum_i sqrt(lambda_i) phi_i(x) xi_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct KLFieldSpec {
    pub mean: f64,
    pub correlation_length: f64,
    pub eigenpairs: Vec<Eigenpair>,
}

impl KLFieldSpec {
    /// Keeps the `n_terms` largest eigenvalues `exp(-pi (j^2 + k^2) l^2) / 4`,
    /// `j, k >= 1`, in descending order; equal eigenvalues are ordered
    /// lexicographically by `(j, k)`.
    pub fn build(mean: f64, correlation_length: f64, n_terms: usize) -> Result<Self> {
        if !(correlation_length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "correlation length must be positive, got {correlation_length}"
            )));
        }
        if n_terms == 0 {
            return Err(Error::InvalidArgument("need at least one expansion term".into()));
        }
        // any pair with j or k > n_terms has j^2 + k^2 > 1 + n_terms^2
        let l2 = correlation_length * correlation_length;
        let mut pairs: Vec<(usize, usize, usize)> = (1..=n_terms)
            .flat_map(|j| (1..=n_terms).map(move |k| (j * j + k * k, j, k)))
            .collect();
        pairs.sort();
        let eigenpairs = pairs
            .into_iter()
            .take(n_terms)
            .map(|(s, j, k)| Eigenpair {
                eigenvalue: 0.25 * (-std::f64::consts::PI * s as f64 * l2).exp(),
                j,
                k,
            })
            .collect();
        Ok(Self {
            mean,
            correlation_length,
            eigenpairs,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.eigenpairs.len()
    }

    /// Evaluates the field at `points` for expansion coordinates `coords`.
    pub fn evaluate(&self, coords: &[f64], points: &[[f64; 2]]) -> Result<Vec<f64>> {
        self.check_coords(coords)?;
        Ok(points
            .iter()
            .map(|&x| {
                self.mean
                    + self
                        .eigenpairs
                        .iter()
                        .zip(coords)
                        .map(|(e, c)| e.eigenvalue.sqrt() * e.eigenfunction(x) * c)
                        .sum::<f64>()
            })
            .collect())
    }

    fn check_coords(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.n_terms() {
            return Err(Error::LengthMismatch {
                expected: self.n_terms(),
                found: coords.len(),
            });
        }
        Ok(())
    }

    /// Precomputes `sqrt(lambda_i) phi_i(x)` at fixed points so repeated
    /// evaluations reduce to a small dense product.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> FieldTable {
        let m = self.n_terms();
        let mut modes = Vec::with_capacity(m * points.len());
        for e in &self.eigenpairs {
            let s = e.eigenvalue.sqrt();
            modes.extend(points.iter().map(|&x| s * e.eigenfunction(x)));
        }
        FieldTable {
            mean: self.mean,
            n_terms: m,
            n_points: points.len(),
            modes,
        }
    }
}

/// Scaled eigenfunctions tabulated at a fixed point set.
#[derive(Clone, Debug)]
pub struct FieldTable {
    mean: f64,
    n_terms: usize,
    n_points: usize,
    modes: Vec<f64>,
}

impl FieldTable {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn evaluate(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.n_terms);
        let mut out = vec![self.mean; self.n_points];
        for (i, &c) in coords.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.modes[i * self.n_points..(i + 1) * self.n_points];
            for (o, &phi) in out.iter_mut().zip(row) {
                *o += c * phi;
            }
        }
        out
    }
}

/// Coordinates for the diffusion (`xi_a`) and reaction (`xi_r`) fields.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleVector {
    pub xi_a: Vec<f64>,
    pub xi_r: Vec<f64>,
}

impl SampleVector {
    pub fn zeros(m: usize) -> Self {
        Self {
            xi_a: vec![0.0; m],
            xi_r: vec![0.0; m],
        }
    }
}

/// Independent sample lane keyed by `(seed, lane)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStream {
    pub seed: u64,
    pub lane: u64,
    /// Half-width of the uniform distribution; zero makes every draw the
    /// zero vector (deterministic coefficients).
    pub half_width: f64,
}

impl SampleStream {
    pub fn new(seed: u64, lane: u64) -> Self {
        Self {
            seed,
            lane,
            half_width: UNIFORM_HALF_WIDTH,
        }
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.half_width = half_width;
        self
    }

    /// Draws sample number `index` with `m` terms per field.
    pub fn draw(&self, index: u64, m: usize) -> SampleVector {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.lane);
        rng.set_word_pos(4 * m as u128 * index as u128);
        let mut next = || {
            // 53 random bits -> [0, 1)
            let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            self.half_width * (2.0 * unit - 1.0)
        };
        let xi_a = (0..m).map(|_| next()).collect();
        let xi_r = (0..m).map(|_| next()).collect();
        SampleVector { xi_a, xi_r }
    }
}

/// Sample `index` of lane 0 for `seed`.
pub fn draw_sample(seed: u64, index: u64, m: usize) -> SampleVector {
    SampleStream::new(seed, 0).draw(index, m)
}
