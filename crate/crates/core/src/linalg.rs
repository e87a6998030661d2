//! Symmetric banded matrices with a direct Cholesky path and a
//! Jacobi-preconditioned conjugate gradient path.

use crate::error::{Error, Result};

/// Symmetric matrix storing the lower band `j in i-bandwidth..=i`.
///
/// Row `i` is contiguous in memory: entry `(i, j)` lives at
/// `i * (bandwidth + 1) + (j + bandwidth - i)`.
#[derive(Clone, Debug)]
pub struct SymBandMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    /// Adds `value` to entry `(i, j)` (and implicitly `(j, i)`).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bandwidth, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bandwidth {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[self.idx(i, i)]).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bandwidth);
            let row = &self.data[self.idx(i, j0)..=self.idx(i, i)];
            let mut acc = 0.0;
            for (off, &a) in row.iter().enumerate() {
                let j = j0 + off;
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// Banded Cholesky factorization `A = L L^T`.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let bw = self.bandwidth;
        let mut l = self.data.clone();
        let idx = |i: usize, j: usize| i * (bw + 1) + (j + bw - i);
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = l[idx(i, j)];
                if k0 < j {
                    let ri = &l[idx(i, k0)..idx(i, j)];
                    let rj = &l[idx(j, k0)..idx(j, j)];
                    s -= dot(ri, rj);
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            row: i,
                            value: s,
                        });
                    }
                    l[idx(i, i)] = s.sqrt();
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        Ok(BandCholesky {
            n: self.n,
            bandwidth: bw,
            data: l,
        })
    }

    /// Jacobi-preconditioned conjugate gradient, stopping when
    /// `||b - Ax|| <= rtol * ||b||`.
    pub fn solve_cg(&self, b: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let bnorm = dot(b, b).sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let inv_diag: Vec<f64> = self
            .diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for it in 0..max_iter {
            let rnorm = dot(&r, &r).sqrt();
            if rnorm <= rtol * bnorm {
                return Ok(x);
            }
            let ap = self.mul_vec(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    row: it,
                    value: pap,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= rtol * bnorm {
            Ok(x)
        } else {
            Err(Error::LinearSolveFailed {
                iterations: max_iter,
                residual: rnorm / bnorm,
            })
        }
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let bw = self.bandwidth;
        // forward: L z = b
        let mut z = b.to_vec();
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            let s = dot(&self.data[self.idx(i, j0)..self.idx(i, i)], &z[j0..i]);
            z[i] = (z[i] - s) / self.data[self.idx(i, i)];
        }
        // backward: L^T x = z, column-oriented
        let mut x = z;
        for i in (0..self.n).rev() {
            x[i] /= self.data[self.idx(i, i)];
            let xi = x[i];
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                x[j] -= self.data[self.idx(i, j)] * xi;
            }
        }
        x
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
