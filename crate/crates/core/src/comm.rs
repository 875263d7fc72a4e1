//! Sample exchange between Voronoi neighbors.
//!
//! Two protocols: unconditional exchange, and exchange filtered by an upper
//! bound on how much a candidate sample can move the receiver's predictions.

use crate::geometry::{Point2, VoronoiPartition};
use crate::gp::GpModel;
use crate::scalar::Real;

pub use crate::gp::Sample;
use crate::gp::SampleSet;

/// Accepted foreign samples per robot, one row per exchange round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransferLedger {
    robots: usize,
    rounds: Vec<Vec<usize>>,
}

impl TransferLedger {
    pub fn new(robots: usize) -> Self {
        TransferLedger { robots, rounds: Vec::new() }
    }

    pub fn robots(&self) -> usize {
        self.robots
    }

    /// Appends one round of per-robot receive counts.
    pub fn record(&mut self, received: Vec<usize>) {
        assert_eq!(received.len(), self.robots, "one count per robot");
        self.rounds.push(received);
    }

    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn round(&self, r: usize) -> &[usize] {
        &self.rounds[r]
    }

    pub fn round_total(&self, r: usize) -> usize {
        self.rounds[r].iter().sum()
    }

    /// Per-robot totals over rounds `0..=r`.
    pub fn cumulative_per_robot(&self, r: usize) -> Vec<usize> {
        let mut acc = vec![0; self.robots];
        for round in &self.rounds[..=r] {
            for (a, &c) in acc.iter_mut().zip(round) {
                *a += c;
            }
        }
        acc
    }

    /// Team total over rounds `0..=r`.
    pub fn cumulative_team(&self, r: usize) -> usize {
        self.rounds[..=r].iter().map(|x| x.iter().sum::<usize>()).sum()
    }
}

/// Bound factors on the change of a GP prediction when one sample is added.
///
/// With `A = K + noise I` the receiver's regularized kernel matrix and `k` the
/// kernel vector of the candidate against the receiver's locations, the
/// prediction at any test point moves by at most
/// `|k(test; X + candidate)| * |y~| * delta_k`, where `y~` is the residual
/// vector (observations minus prior mean) including the candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpactBound<T> {
    pub z_bound: T,
    pub y_bound: T,
    pub x_bound: T,
    pub delta_k: T,
    /// `false` when the bound's denominator is not positive; all factors are then infinite.
    pub valid: bool,
}

pub fn impact_bound<T: Real>(model: &GpModel<T>, candidate: Point2<T>) -> ImpactBound<T> {
    // unit-variance kernel: k(chi, chi) = 1
    let kappa = T::one();
    let k = model.kernel_vector(candidate);
    let k_norm = k.iter().map(|&v| v * v).sum::<T>().sqrt();
    let inv_norm = model.inverse_spectral_norm();
    let ratio = k_norm / kappa;
    let denom = T::one() - (ratio * inv_norm) * (ratio * inv_norm);
    if !(denom > T::zero()) {
        let inf = T::infinity();
        return ImpactBound { z_bound: inf, y_bound: inf, x_bound: inf, delta_k: inf, valid: false };
    }
    let z = ((T::one() / kappa).abs() + ratio * ratio * inv_norm) / denom;
    let w = if k.is_empty() { T::zero() } else { model.solve(&k).iter().map(|&v| v * v).sum::<T>().sqrt() };
    let y = w * z;
    let x = w * w * z;
    ImpactBound { z_bound: z, y_bound: y, x_bound: x, delta_k: x.max(z) + y, valid: true }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AcceptDirection {
    /// Accept when `delta_k >= threshold`.
    #[default]
    AtLeast,
    /// Accept when `delta_k <= threshold`.
    AtMost,
}

/// What to do with a candidate whose bound has a non-positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InvalidBoundPolicy {
    /// Always accept the candidate.
    #[default]
    Accept,
    /// Treat the bound as `delta_k = +inf` and apply the threshold direction.
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptRule<T> {
    pub threshold: T,
    pub direction: AcceptDirection,
    pub invalid: InvalidBoundPolicy,
}

impl<T: Real> AcceptRule<T> {
    pub fn new(threshold: T, direction: AcceptDirection) -> Self {
        AcceptRule { threshold, direction, invalid: InvalidBoundPolicy::Accept }
    }

    pub fn with_invalid(mut self, invalid: InvalidBoundPolicy) -> Self {
        self.invalid = invalid;
        self
    }

    pub fn accepts(&self, bound: &ImpactBound<T>) -> bool {
        if !bound.valid && self.invalid == InvalidBoundPolicy::Accept {
            return true;
        }
        match self.direction {
            AcceptDirection::AtLeast => bound.delta_k >= self.threshold,
            AcceptDirection::AtMost => bound.delta_k <= self.threshold,
        }
    }
}

/// Every robot takes every Voronoi neighbor's fresh sample.
///
/// `fresh[j]` is robot `j`'s sample for this round. Returns per-robot counts
/// of newly inserted foreign samples; keys already present are skipped.
pub fn naive_exchange<T: Real>(stores: &mut [SampleSet<T>], fresh: &[Sample<T>], partition: &VoronoiPartition<T>) -> Vec<usize> {
    assert_eq!(stores.len(), fresh.len());
    let mut received = vec![0; stores.len()];
    for (i, store) in stores.iter_mut().enumerate() {
        for &j in partition.neighbors(i) {
            if store.insert(fresh[j]) {
                received[i] += 1;
            }
        }
    }
    received
}

/// Neighbor samples filtered by [`impact_bound`] against each receiver's model.
///
/// Every decision in a round is made against the `models` snapshot, so the
/// outcome does not depend on neighbor order. Receivers with an empty model
/// accept everything.
pub fn constrained_exchange<T: Real>(
    stores: &mut [SampleSet<T>],
    models: &[GpModel<T>],
    fresh: &[Sample<T>],
    partition: &VoronoiPartition<T>,
    rule: AcceptRule<T>,
) -> Vec<usize> {
    assert_eq!(stores.len(), fresh.len());
    assert_eq!(stores.len(), models.len());
    let mut received = vec![0; stores.len()];
    for (i, store) in stores.iter_mut().enumerate() {
        let model = &models[i];
        for &j in partition.neighbors(i) {
            let s = fresh[j];
            if store.contains_key(s.key()) {
                continue;
            }
            let accept = model.is_empty() || rule.accepts(&impact_bound(model, s.location));
            if accept && store.insert(s) {
                received[i] += 1;
            }
        }
    }
    received
}
