//! Per-robot state and the explore/cover control law.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::{ConvexDomain, Point2, ScalarField2D};
use crate::gp::{GpModel, Sample, SampleSet};
use crate::scalar::Real;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("schedule needs at least one iteration")]
    Empty,
    #[error("beta and gamma have different lengths ({beta} vs {gamma})")]
    LengthMismatch { beta: usize, gamma: usize },
    #[error("beta must be nonnegative and non-decreasing (violated at iteration {iteration})")]
    Beta { iteration: usize },
    #[error("gamma must lie in [0, 1) and be strictly decreasing, or be identically zero (violated at iteration {iteration})")]
    Gamma { iteration: usize },
    #[error("kappa must be positive")]
    Kappa,
    #[error("dt must be positive with dt * kappa < 1")]
    Step,
    #[error("convergence tolerance must be positive")]
    Tolerance,
    #[error("max_steps must be at least 1")]
    MaxSteps,
}

/// Exploration weights and controller constants, one `beta`/`gamma` entry per iteration `1..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleParams<T> {
    beta: Vec<T>,
    gamma: Vec<T>,
    pub kappa: T,
    pub dt: T,
    pub eps_conv: T,
    pub max_steps: usize,
}

impl<T: Real> ScheduleParams<T> {
    pub fn new(beta: Vec<T>, gamma: Vec<T>, kappa: T, dt: T, eps_conv: T, max_steps: usize) -> Result<Self, ScheduleError> {
        if beta.is_empty() {
            return Err(ScheduleError::Empty);
        }
        if beta.len() != gamma.len() {
            return Err(ScheduleError::LengthMismatch { beta: beta.len(), gamma: gamma.len() });
        }
        for (k, &b) in beta.iter().enumerate() {
            if !(b >= T::zero()) || !b.is_finite() || (k > 0 && b < beta[k - 1]) {
                return Err(ScheduleError::Beta { iteration: k + 1 });
            }
        }
        let all_zero = gamma.iter().all(|&g| g == T::zero());
        if !all_zero {
            for (k, &g) in gamma.iter().enumerate() {
                if !(g >= T::zero() && g < T::one()) || (k > 0 && !(g < gamma[k - 1])) {
                    return Err(ScheduleError::Gamma { iteration: k + 1 });
                }
            }
        }
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(ScheduleError::Kappa);
        }
        if !(dt > T::zero()) || !(dt * kappa < T::one()) {
            return Err(ScheduleError::Step);
        }
        if !(eps_conv > T::zero()) {
            return Err(ScheduleError::Tolerance);
        }
        if max_steps == 0 {
            return Err(ScheduleError::MaxSteps);
        }
        Ok(ScheduleParams { beta, gamma, kappa, dt, eps_conv, max_steps })
    }

    /// `beta(n) = 2 ln(n + 1)`, `gamma(n) = 0.9 * 0.7^(n-1)`, `kappa = 1`, `dt = 0.05`,
    /// tolerance `1e-3 x diameter`, 500 inner steps.
    pub fn standard(iterations: usize, diameter: T) -> Result<Self, ScheduleError> {
        Self::new(default_beta(iterations), default_gamma(iterations), T::one(), T::lit(0.05), T::lit(1e-3) * diameter, 500)
    }

    pub fn iterations(&self) -> usize {
        self.beta.len()
    }

    /// `beta` at iteration `n` (1-based).
    pub fn beta(&self, n: usize) -> T {
        self.beta[n - 1]
    }

    /// `gamma` at iteration `n` (1-based).
    pub fn gamma(&self, n: usize) -> T {
        self.gamma[n - 1]
    }

    pub fn betas(&self) -> &[T] {
        &self.beta
    }

    pub fn gammas(&self) -> &[T] {
        &self.gamma
    }
}

pub fn default_beta<T: Real>(iterations: usize) -> Vec<T> {
    (1..=iterations).map(|n| T::lit(2.0) * T::from_index(n + 1).ln()).collect()
}

pub fn default_gamma<T: Real>(iterations: usize) -> Vec<T> {
    (1..=iterations).map(|n| T::lit(0.9) * T::lit(0.7).powi(n as i32 - 1)).collect()
}

/// Additive Gaussian measurement noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementModel<T> {
    pub noise_std: T,
}

impl<T: Real> MeasurementModel<T> {
    pub fn new(noise_std: T) -> Self {
        MeasurementModel { noise_std }
    }

    pub fn noise_var(&self) -> T {
        self.noise_std * self.noise_std
    }
}

/// `mean - sqrt(beta) * std`, pointwise.
pub fn lower_confidence_from_fields<T: Real>(mean: &ScalarField2D<T>, std: &ScalarField2D<T>, beta_n: T) -> ScalarField2D<T> {
    let w = beta_n.sqrt();
    mean.zip_with(std, |m, s| m - w * s).expect("posterior fields share a grid")
}

/// Lower-confidence density estimate from a fitted model.
pub fn lower_confidence_estimate<T: Real>(model: &GpModel<T>, beta_n: T, domain: &Arc<ConvexDomain<T>>) -> ScalarField2D<T> {
    let (mean, std) = model.field(domain);
    lower_confidence_from_fields(&mean, &std, beta_n)
}

/// `(1 - gamma) * centroid + gamma * explore`
#[inline]
pub fn goal_point<T: Real>(centroid: Point2<T>, explore: Point2<T>, gamma_n: T) -> Point2<T> {
    centroid + (explore - centroid) * gamma_n
}

/// One forward-Euler step of `x' = kappa (goal - x)`, kept inside the domain.
#[inline]
pub fn motion_step<T: Real>(position: Point2<T>, goal: Point2<T>, kappa: T, dt: T, domain: &ConvexDomain<T>) -> Point2<T> {
    domain.project(position + (goal - position) * (kappa * dt))
}

/// Noisy measurement of the true field at `position`.
pub fn take_sample<T: Real, R: Rng + ?Sized>(
    robot: usize,
    position: Point2<T>,
    iteration: usize,
    true_field: &ScalarField2D<T>,
    meas: &MeasurementModel<T>,
    rng: &mut R,
) -> Sample<T> {
    let z: f64 = rng.sample(StandardNormal);
    let value = true_field.interpolate(position) + meas.noise_std * T::lit(z);
    Sample { location: position, value, origin_robot: robot, iteration }
}

/// Everything one robot knows and carries between iterations.
#[derive(Clone, Debug)]
pub struct RobotState<T: Real> {
    pub id: usize,
    pub position: Point2<T>,
    pub samples: SampleSet<T>,
    pub model: GpModel<T>,
    /// Posterior mean of `model` on the grid.
    pub posterior_mean: ScalarField2D<T>,
    /// Posterior standard deviation of `model` on the grid.
    pub posterior_std: ScalarField2D<T>,
    /// Lower-confidence estimate used for the current iteration.
    pub estimate: ScalarField2D<T>,
    pub goal_centroid: Point2<T>,
    pub goal_explore: Point2<T>,
    pub rng: ChaCha8Rng,
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::gp::Hyperparams;

    #[test]
    fn goal_interpolation() {
        let c = Point2::new(0.2f64, 0.2);
        let e = Point2::new(0.6, 0.4);
        assert_eq!(goal_point(c, e, 0.0), c);
        assert_eq!(goal_point(c, c, 0.37), c);
        let g = goal_point(c, e, 0.5);
        assert!((g.x - 0.4).abs() < 1e-15 && (g.y - 0.3).abs() < 1e-15);
    }

    #[test]
    fn motion_fixed_point_and_exact_step() {
        let d = ConvexDomain::<f64>::unit_square(4);
        let p = Point2::new(0.3, 0.6);
        assert_eq!(motion_step(p, p, 1.0, 0.05, &d), p);
        let g = Point2::new(0.9, 0.1);
        let q = motion_step(p, g, 2.0, 0.5, &d);
        assert!(q.dist(g) < 1e-15);
    }

    #[test]
    fn motion_contracts_geometrically() {
        let d = ConvexDomain::<f64>::unit_square(4);
        let goal = Point2::new(1.0, 1.0);
        let mut p = Point2::new(0.0, 0.0);
        let mut prev = p.dist(goal);
        for _ in 0..50 {
            p = motion_step(p, goal, 1.0, 0.1, &d);
            let now = p.dist(goal);
            assert!((now / prev - 0.9).abs() < 1e-12);
            prev = now;
        }
    }

    #[test]
    fn schedule_validation() {
        let ok = ScheduleParams::<f64>::standard(15, 1.0).unwrap();
        assert_eq!(ok.iterations(), 15);
        assert!((ok.gamma(1) - 0.9).abs() < 1e-15);
        assert!((ok.beta(1) - 2.0 * 2f64.ln()).abs() < 1e-15);
        let mk = |b: Vec<f64>, g: Vec<f64>| ScheduleParams::new(b, g, 1.0, 0.05, 1e-3, 100);
        assert_eq!(mk(vec![1.0, 0.5], vec![0.5, 0.4]).unwrap_err(), ScheduleError::Beta { iteration: 2 });
        assert_eq!(mk(vec![1.0, 1.0], vec![0.5, 0.5]).unwrap_err(), ScheduleError::Gamma { iteration: 2 });
        assert_eq!(mk(vec![1.0, 1.0], vec![1.0, 0.5]).unwrap_err(), ScheduleError::Gamma { iteration: 1 });
        assert!(mk(vec![0.0, 0.0], vec![0.0, 0.0]).is_ok());
        assert_eq!(mk(vec![1.0], vec![0.5, 0.4]).unwrap_err(), ScheduleError::LengthMismatch { beta: 1, gamma: 2 });
        assert_eq!(ScheduleParams::new(vec![1.0], vec![0.1], 1.0, 1.0, 1e-3, 10).unwrap_err(), ScheduleError::Step);
        assert_eq!(ScheduleParams::new(vec![1.0], vec![0.1], -1.0, 0.1, 1e-3, 10).unwrap_err(), ScheduleError::Kappa);
    }

    #[test]
    fn lower_confidence_reductions() {
        let d = Arc::new(ConvexDomain::<f64>::unit_square(10));
        let prior = GpModel::prior(Hyperparams::zero_mean(0.2), 0.01);
        let f = lower_confidence_estimate(&prior, 1.0, &d);
        assert!(f.values().iter().all(|&v| v == -1.0));
        let (mean, _) = prior.field(&d);
        let f0 = lower_confidence_estimate(&prior, 0.0, &d);
        assert_eq!(f0.values(), mean.values());
    }

    #[test]
    fn noiseless_and_seeded_sampling() {
        let d = Arc::new(ConvexDomain::<f64>::unit_square(20));
        let truth = ScalarField2D::from_fn(d, |q| 1.0 + q.x);
        let p = Point2::new(0.4, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = take_sample(2, p, 5, &truth, &MeasurementModel::new(0.0), &mut rng);
        assert!((s.value - truth.interpolate(p)).abs() == 0.0);
        assert_eq!((s.origin_robot, s.iteration), (2, 5));
        let meas = MeasurementModel::new(0.1);
        let a = take_sample(0, p, 1, &truth, &meas, &mut ChaCha8Rng::seed_from_u64(9));
        let b = take_sample(0, p, 1, &truth, &meas, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn empirical_noise_std() {
        let d = Arc::new(ConvexDomain::<f64>::unit_square(10));
        let truth = ScalarField2D::constant(d, 2.0);
        let meas = MeasurementModel::new(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..10_000).map(|k| take_sample(0, Point2::new(0.5, 0.5), k, &truth, &meas, &mut rng).value).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vals.len() - 1) as f64;
        assert!((var.sqrt() - 0.1).abs() < 0.005);
    }
}
