//! Dense LU factorization with partial pivoting, real or complex.
//!
//! Systems here are desk scale (tens of buses), so dense storage is fine.

use num_traits::{Float, Zero};

use crate::num::{Pivot, Scalar as _};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("matrix is singular at column {column}")]
pub struct Singular {
    /// Column (0-based) where no usable pivot was found.
    pub column: usize,
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Pivot> DenseMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![F::pivot_zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: F) {
        let k = i * self.n + j;
        self.data[k] = self.data[k] + v;
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter()
                    .zip(x)
                    .fold(F::pivot_zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn factor(self) -> Result<Lu<F>, Singular> {
        Lu::new(self)
    }
}

/// Factorization `P·A = L·U` stored in place.
#[derive(Debug, Clone)]
pub struct Lu<F> {
    n: usize,
    lu: Vec<F>,
    perm: Vec<usize>,
}

impl<F: Pivot> Lu<F> {
    fn new(a: DenseMatrix<F>) -> Result<Self, Singular> {
        let n = a.n;
        let mut lu = a.data;
        let mut perm: Vec<usize> = (0..n).collect();

        // scale for a relative singularity test
        let scale = lu
            .iter()
            .map(|v| v.magnitude())
            .fold(F::Real::zero(), |m, v| if v > m { v } else { m });
        let tiny = scale * F::Real::epsilon() * F::Real::of(n.max(1) as f64);

        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].magnitude();
            for i in k + 1..n {
                let m = lu[i * n + k].magnitude();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor.magnitude().is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    lu[i * n + j] = lu[i * n + j] - factor * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let mut x: Vec<F> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }
}
