use std::sync::Arc;

use super::{ConvexDomain, GeometryError, Point2};
use crate::scalar::Real;

/// A scalar function sampled at every grid point of a domain.
#[derive(Clone, Debug)]
pub struct ScalarField2D<T> {
    domain: Arc<ConvexDomain<T>>,
    values: Vec<T>,
}

impl<T: Real> ScalarField2D<T> {
    pub fn from_values(domain: Arc<ConvexDomain<T>>, values: Vec<T>) -> Result<Self, GeometryError> {
        if values.len() != domain.num_grid_points() {
            return Err(GeometryError::GridMismatch);
        }
        Ok(ScalarField2D { domain, values })
    }

    pub fn from_fn(domain: Arc<ConvexDomain<T>>, f: impl Fn(Point2<T>) -> T) -> Self {
        let values = domain.grid_points().iter().map(|&q| f(q)).collect();
        ScalarField2D { domain, values }
    }

    pub fn constant(domain: Arc<ConvexDomain<T>>, value: T) -> Self {
        let values = vec![value; domain.num_grid_points()];
        ScalarField2D { domain, values }
    }

    pub fn domain(&self) -> &Arc<ConvexDomain<T>> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, grid_index: usize) -> T {
        self.values[grid_index]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField2D { domain: self.domain.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, GeometryError> {
        if !self.same_grid(other) {
            return Err(GeometryError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField2D { domain: self.domain.clone(), values })
    }

    /// Copy with every value raised to at least `floor`.
    pub fn clamped_min(&self, floor: T) -> Self {
        self.map(|v| v.max(floor))
    }

    /// Bilinear interpolation between grid nodes.
    pub fn interpolate(&self, p: Point2<T>) -> T {
        self.domain.interpolate(&self.values, p)
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.domain.cell_area()
    }
}

/// `sum |a(q) - b(q)| dq` over the domain grid.
pub fn integrate_abs_difference<T: Real>(a: &ScalarField2D<T>, b: &ScalarField2D<T>) -> Result<T, GeometryError> {
    if !a.same_grid(b) {
        return Err(GeometryError::GridMismatch);
    }
    let s: T = a.values.iter().zip(&b.values).map(|(&x, &y)| (x - y).abs()).sum();
    Ok(s * a.domain.cell_area())
}
