//! Gaussian-process regression with a linear mean `rho^T x` and a unit-variance
//! squared-exponential kernel of length scale `tau`.

mod fit;
pub mod linalg;
mod model;
mod samples;

use thiserror::Error;

use crate::geometry::Point2;
use crate::scalar::Real;

pub use fit::{fit_hyperparams, neg_log_marginal_likelihood, profiled_mean_slope, SearchConfig};
pub use model::{regularized_kernel_matrix, GpModel};
pub use samples::{Sample, SampleSet};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GpError {
    #[error("kernel matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("length scale must be positive")]
    InvalidLengthScale,
    #[error("noise variance must be nonnegative")]
    InvalidNoise,
    #[error("at least one sample is required")]
    NoSamples,
}

/// Mean slope and kernel length scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams<T> {
    pub rho: [T; 2],
    pub tau: T,
}

impl<T: Real> Hyperparams<T> {
    pub fn new(rho: [T; 2], tau: T) -> Self {
        Hyperparams { rho, tau }
    }

    /// Zero mean with the given length scale.
    pub fn zero_mean(tau: T) -> Self {
        Hyperparams { rho: [T::zero(), T::zero()], tau }
    }
}

#[inline]
pub(crate) fn kernel_scale<T: Real>(tau: T) -> T {
    T::one() / (T::lit(2.0) * tau * tau)
}

/// `exp(-|x - x2|^2 / (2 tau^2))`
#[inline]
pub fn kernel<T: Real>(x: Point2<T>, x2: Point2<T>, tau: T) -> T {
    (-(x.dist_sq(x2)) * kernel_scale(tau)).exp()
}

/// `rho^T x`
#[inline]
pub fn mean_prior<T: Real>(x: Point2<T>, rho: [T; 2]) -> T {
    rho[0] * x.x + rho[1] * x.y
}
