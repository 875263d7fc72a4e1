use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{ConvexDomain, Point2, ScalarField2D};
use crate::scalar::Real;

/// Weighted isotropic bivariate normal density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBump<T> {
    pub weight: T,
    pub mean: Point2<T>,
    pub std: T,
}

impl<T: Real> GaussianBump<T> {
    pub fn new(weight: T, mean: Point2<T>, std: T) -> Self {
        GaussianBump { weight, mean, std }
    }

    #[inline]
    pub fn eval(&self, q: Point2<T>) -> T {
        let s2 = self.std * self.std;
        self.weight * (-(q.dist_sq(self.mean)) / (T::lit(2.0) * s2)).exp() / (T::TAU() * s2)
    }
}

/// Gaussian mixture plus a constant offset.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySpec<T> {
    pub components: Vec<GaussianBump<T>>,
    pub offset: T,
}

impl<T: Real> DensitySpec<T> {
    pub fn new(components: Vec<GaussianBump<T>>, offset: T) -> Self {
        DensitySpec { components, offset }
    }

    pub fn eval(&self, q: Point2<T>) -> T {
        self.offset + self.components.iter().map(|c| c.eval(q)).sum::<T>()
    }

    pub fn field(&self, domain: &Arc<ConvexDomain<T>>) -> ScalarField2D<T> {
        ScalarField2D::from_fn(domain.clone(), |q| self.eval(q))
    }

    /// Two-bump stand-in for a bimodal reference field.
    pub fn bimodal() -> Self {
        let p = Point2::from_f64;
        DensitySpec::new(
            vec![GaussianBump::new(T::lit(0.55), p(0.3, 0.65), T::lit(0.15)), GaussianBump::new(T::lit(0.45), p(0.72, 0.3), T::lit(0.12))],
            T::zero(),
        )
    }

    /// Three bumps with different means and spreads.
    pub fn three_bumps() -> Self {
        let p = Point2::from_f64;
        DensitySpec::new(
            vec![
                GaussianBump::new(T::lit(0.3), p(0.2, 0.25), T::lit(0.1)),
                GaussianBump::new(T::lit(0.5), p(0.75, 0.7), T::lit(0.18)),
                GaussianBump::new(T::lit(0.2), p(0.3, 0.8), T::lit(0.08)),
            ],
            T::zero(),
        )
    }

    /// `count` equal-weight, equal-spread bumps with means uniform in `[0.1, 0.9]^2`.
    pub fn random_bumps(count: usize, std: T, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = T::one() / T::from_index(count.max(1));
        let components = (0..count)
            .map(|_| {
                let x: f64 = rng.random_range(0.1..0.9);
                let y: f64 = rng.random_range(0.1..0.9);
                GaussianBump::new(w, Point2::from_f64(x, y), std)
            })
            .collect();
        DensitySpec::new(components, T::zero())
    }
}
