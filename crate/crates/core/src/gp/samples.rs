use std::collections::HashSet;

use crate::geometry::Point2;
use crate::scalar::Real;

/// One noisy measurement, identified by who took it and when.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample<T> {
    pub location: Point2<T>,
    pub value: T,
    pub origin_robot: usize,
    pub iteration: usize,
}

impl<T> Sample<T> {
    pub fn key(&self) -> (usize, usize) {
        (self.origin_robot, self.iteration)
    }
}

/// Measurements with set semantics on `(origin_robot, iteration)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSet<T> {
    locations: Vec<Point2<T>>,
    values: Vec<T>,
    origins: Vec<(usize, usize)>,
    keys: HashSet<(usize, usize)>,
}

impl<T: Real> SampleSet<T> {
    pub fn new() -> Self {
        SampleSet { locations: Vec::new(), values: Vec::new(), origins: Vec::new(), keys: HashSet::new() }
    }

    pub fn from_samples(samples: impl IntoIterator<Item = Sample<T>>) -> Self {
        let mut s = Self::new();
        for x in samples {
            s.insert(x);
        }
        s
    }

    /// Adds a sample; returns `false` when its key is already present.
    pub fn insert(&mut self, sample: Sample<T>) -> bool {
        if !self.keys.insert(sample.key()) {
            return false;
        }
        self.locations.push(sample.location);
        self.values.push(sample.value);
        self.origins.push(sample.key());
        true
    }

    pub fn contains_key(&self, key: (usize, usize)) -> bool {
        self.keys.contains(&key)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn locations(&self) -> &[Point2<T>] {
        &self.locations
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }

    pub fn iter(&self) -> impl Iterator<Item = Sample<T>> + '_ {
        (0..self.len()).map(move |k| Sample {
            location: self.locations[k],
            value: self.values[k],
            origin_robot: self.origins[k].0,
            iteration: self.origins[k].1,
        })
    }
}
