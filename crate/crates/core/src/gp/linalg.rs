//! Small dense kernels: Cholesky factorization, triangular solves, symmetric eigenvalues.
//!
//! Matrices are row-major `Vec<T>` of length `n * n`.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

/// Lower-triangular factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(a: &[T], n: usize) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s = s - ri[k] * rj[k];
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(NotPositiveDefinite { pivot: i });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> T {
        self.l[i * self.n + j]
    }

    /// `log |A|`
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.n).map(|i| two * self.l(i, i).ln()).sum()
    }

    /// In place `b <- L^{-1} b`.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let mut s = b[i];
            for k in 0..i {
                s = s - row[k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// In place `b <- L^{-T} b`.
    pub fn solve_upper_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s = s - self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// `A^{-1} b`
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `b^T A^{-1} b`, computed as `|L^{-1} b|^2`.
    pub fn quad_form(&self, b: &[T]) -> T {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        x.iter().map(|&v| v * v).sum()
    }

    /// In place `B <- L^{-1} B` for a row-major `n x ncols` block.
    pub fn solve_lower_many(&self, b: &mut [T], ncols: usize) {
        let n = self.n;
        assert_eq!(b.len(), n * ncols);
        for i in 0..n {
            let (done, rest) = b.split_at_mut(i * ncols);
            let row_i = &mut rest[..ncols];
            for k in 0..i {
                let lik = self.l[i * n + k];
                let row_k = &done[k * ncols..(k + 1) * ncols];
                for (x, &y) in row_i.iter_mut().zip(row_k) {
                    *x = *x - lik * y;
                }
            }
            let d = self.l[i * n + i];
            for x in row_i.iter_mut() {
                *x = *x / d;
            }
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &[T], n: usize) -> Vec<T> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + m[i * n + i] * m[i * n + i];
            for j in (i + 1)..n {
                off = off + m[i * n + j] * m[i * n + j];
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}
