use std::sync::{Arc, OnceLock};

use super::linalg::{symmetric_eigenvalues, Cholesky};
use super::{kernel, mean_prior, GpError, Hyperparams, SampleSet};
use crate::geometry::{ConvexDomain, Point2, ScalarField2D};
use crate::scalar::Real;

const FIELD_CHUNK: usize = 128;

/// Builds `K(tau) + noise_var * I` over the given locations, row-major.
///
/// Only the upper triangle is evaluated; the lower one is mirrored.
pub fn regularized_kernel_matrix<T: Real>(locations: &[Point2<T>], tau: T, noise_var: T) -> Vec<T> {
    let n = locations.len();
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        a[i * n + i] = T::one() + noise_var;
        for j in (i + 1)..n {
            let k = kernel(locations[i], locations[j], tau);
            a[i * n + j] = k;
            a[j * n + i] = k;
        }
    }
    a
}

/// A conditioned Gaussian process: immutable once built.
#[derive(Debug)]
pub struct GpModel<T> {
    samples: SampleSet<T>,
    hyper: Hyperparams<T>,
    noise_var: T,
    factor: Option<Cholesky<T>>,
    /// `(K + noise I)^{-1} (y - mu(X))`
    alpha: Vec<T>,
    inverse_norm: OnceLock<T>,
}

impl<T: Real> Clone for GpModel<T> {
    fn clone(&self) -> Self {
        let inverse_norm = OnceLock::new();
        if let Some(&v) = self.inverse_norm.get() {
            let _ = inverse_norm.set(v);
        }
        GpModel {
            samples: self.samples.clone(),
            hyper: self.hyper,
            noise_var: self.noise_var,
            factor: self.factor.clone(),
            alpha: self.alpha.clone(),
            inverse_norm,
        }
    }
}

impl<T: Real> GpModel<T> {
    pub fn new(samples: SampleSet<T>, hyper: Hyperparams<T>, noise_var: T) -> Result<Self, GpError> {
        if !(hyper.tau > T::zero()) {
            return Err(GpError::InvalidLengthScale);
        }
        if !(noise_var >= T::zero()) {
            return Err(GpError::InvalidNoise);
        }
        if samples.is_empty() {
            return Ok(GpModel { samples, hyper, noise_var, factor: None, alpha: Vec::new(), inverse_norm: OnceLock::new() });
        }
        let n = samples.len();
        let a = regularized_kernel_matrix(samples.locations(), hyper.tau, noise_var);
        let factor = Cholesky::new(&a, n).map_err(|e| GpError::NotPositiveDefinite { pivot: e.pivot })?;
        let resid: Vec<T> = samples.locations().iter().zip(samples.values()).map(|(&x, &y)| y - mean_prior(x, hyper.rho)).collect();
        let alpha = factor.solve(&resid);
        Ok(GpModel { samples, hyper, noise_var, factor: Some(factor), alpha, inverse_norm: OnceLock::new() })
    }

    /// Model with no data: posterior equals the prior.
    pub fn prior(hyper: Hyperparams<T>, noise_var: T) -> Self {
        Self::new(SampleSet::new(), hyper, noise_var).expect("prior model is always valid")
    }

    pub fn samples(&self) -> &SampleSet<T> {
        &self.samples
    }

    pub fn hyper(&self) -> Hyperparams<T> {
        self.hyper
    }

    pub fn noise_var(&self) -> T {
        self.noise_var
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn factor(&self) -> Option<&Cholesky<T>> {
        self.factor.as_ref()
    }

    /// `k(x; X)` over the model's sample locations.
    pub fn kernel_vector(&self, x: Point2<T>) -> Vec<T> {
        self.samples.locations().iter().map(|&xa| kernel(x, xa, self.hyper.tau)).collect()
    }

    /// `(K + noise I)^{-1} v`; `v` must have one entry per sample.
    pub fn solve(&self, v: &[T]) -> Vec<T> {
        match &self.factor {
            Some(f) => f.solve(v),
            None => Vec::new(),
        }
    }

    pub fn mean(&self, x: Point2<T>) -> T {
        let tau = self.hyper.tau;
        let mut acc = mean_prior(x, self.hyper.rho);
        for (&xa, &w) in self.samples.locations().iter().zip(&self.alpha) {
            acc = acc + kernel(x, xa, tau) * w;
        }
        acc
    }

    /// Posterior variance, clamped at zero.
    pub fn variance(&self, x: Point2<T>) -> T {
        let mut var = kernel(x, x, self.hyper.tau);
        if let Some(f) = &self.factor {
            let mut v = self.kernel_vector(x);
            f.solve_lower_in_place(&mut v);
            for c in v {
                var = var - c * c;
            }
        }
        var.max(T::zero())
    }

    pub fn std(&self, x: Point2<T>) -> T {
        self.variance(x).sqrt()
    }

    /// Posterior mean and standard deviation at every domain grid point.
    pub fn field(&self, domain: &Arc<ConvexDomain<T>>) -> (ScalarField2D<T>, ScalarField2D<T>) {
        let pts = domain.grid_points();
        let rho = self.hyper.rho;
        let tau = self.hyper.tau;
        let mut mean: Vec<T> = pts.iter().map(|&q| mean_prior(q, rho)).collect();
        let mut var = vec![T::one(); pts.len()];
        if let Some(f) = &self.factor {
            let n = self.samples.len();
            let locs = self.samples.locations();
            let inv2 = super::kernel_scale(tau);
            let mut block = vec![T::zero(); n * FIELD_CHUNK];
            for start in (0..pts.len()).step_by(FIELD_CHUNK) {
                let chunk = &pts[start..(start + FIELD_CHUNK).min(pts.len())];
                let b = chunk.len();
                let block = &mut block[..n * b];
                for (a, &xa) in locs.iter().enumerate() {
                    let w = self.alpha[a];
                    let row = &mut block[a * b..(a + 1) * b];
                    for (c, &q) in chunk.iter().enumerate() {
                        let k = (-(q.dist_sq(xa)) * inv2).exp();
                        row[c] = k;
                        mean[start + c] = mean[start + c] + k * w;
                    }
                }
                f.solve_lower_many(block, b);
                for a in 0..n {
                    let row = &block[a * b..(a + 1) * b];
                    for (c, &v) in row.iter().enumerate() {
                        var[start + c] = var[start + c] - v * v;
                    }
                }
            }
        }
        let std = var.into_iter().map(|v| v.max(T::zero()).sqrt()).collect();
        (
            ScalarField2D::from_values(domain.clone(), mean).expect("grid length"),
            ScalarField2D::from_values(domain.clone(), std).expect("grid length"),
        )
    }

    /// Spectral norm of `(K + noise I)^{-1}`, i.e. the reciprocal of its smallest eigenvalue.
    ///
    /// Computed once and cached. Zero for an empty model.
    pub fn inverse_spectral_norm(&self) -> T {
        *self.inverse_norm.get_or_init(|| {
            let n = self.samples.len();
            if n == 0 {
                return T::zero();
            }
            let a = regularized_kernel_matrix(self.samples.locations(), self.hyper.tau, self.noise_var);
            let ev = symmetric_eigenvalues(&a, n);
            T::one() / ev[0]
        })
    }
}
