//! Full coverage runs: centralized estimation and the two decentralized
//! exchange variants, plus the reference minimizer used for regret.

mod density;
mod metrics;
mod oracle;
mod run;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agent::{MeasurementModel, ScheduleParams};
use crate::comm::AcceptRule;
use crate::geometry::{coverage_cost, integrate_abs_difference, ConvexDomain, GeometryError, Point2, ScalarField2D};
use crate::gp::{GpError, SearchConfig};
use crate::scalar::Real;

pub use density::{DensitySpec, GaussianBump};
pub use metrics::{IterationMetrics, PhaseTimings, RunMetrics, WarnFlags};
pub use oracle::{cvt_oracle, lloyd, LloydRun, OracleConfig, OracleResult};
pub use run::{run, RunOutput};

/// Relative slack allowed below the oracle's best cost before regret counts as suspicious.
pub const ORACLE_SLACK: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunMode {
    /// One shared model fed with every robot's samples.
    Centralized,
    /// Per-robot models; every Voronoi neighbor's sample is accepted.
    NaiveExchange,
    /// Per-robot models; neighbor samples filtered by the impact bound.
    ConstrainedExchange,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::Centralized, RunMode::NaiveExchange, RunMode::ConstrainedExchange];

    pub fn label(self) -> &'static str {
        match self {
            RunMode::Centralized => "VEC",
            RunMode::NaiveExchange => "DVEC-nc",
            RunMode::ConstrainedExchange => "DVEC-cc",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode `{s}` (expected VEC, DVEC-nc or DVEC-cc)"))
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

/// Everything that defines one scenario except the mode and the seed.
#[derive(Clone, Debug)]
pub struct ScenarioConfig<T: Real> {
    pub domain: Arc<ConvexDomain<T>>,
    pub density: DensitySpec<T>,
    pub robots: usize,
    pub schedule: ScheduleParams<T>,
    pub measurement: MeasurementModel<T>,
    pub search: SearchConfig<T>,
    pub accept: AcceptRule<T>,
    pub oracle: OracleConfig<T>,
    /// Skip learning: every robot uses the true density with zero uncertainty.
    pub known_density: bool,
    /// Estimates are clipped from below to this value before computing centroids.
    pub density_floor: T,
}

impl<T: Real> ScenarioConfig<T> {
    /// Standard schedules and search bounds for `domain`.
    pub fn new(domain: Arc<ConvexDomain<T>>, density: DensitySpec<T>, robots: usize, iterations: usize) -> Result<Self, SimError> {
        let diam = domain.diameter();
        let schedule = ScheduleParams::standard(iterations, diam).map_err(|e| SimError::Config(e.to_string()))?;
        Ok(ScenarioConfig {
            domain,
            density,
            robots,
            schedule,
            measurement: MeasurementModel::new(T::lit(0.1)),
            search: SearchConfig::for_diameter(diam),
            accept: AcceptRule::new(T::zero(), Default::default()),
            oracle: OracleConfig::default(),
            known_density: false,
            density_floor: T::lit(1e-6),
        })
    }

    pub fn iterations(&self) -> usize {
        self.schedule.iterations()
    }

    pub fn true_field(&self) -> ScalarField2D<T> {
        self.density.field(&self.domain)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.robots == 0 {
            return bad("at least one robot is required".into());
        }
        if self.robots > self.domain.num_grid_points() {
            return bad(format!("{} robots but only {} grid points", self.robots, self.domain.num_grid_points()));
        }
        for (k, c) in self.density.components.iter().enumerate() {
            if !(c.std > T::zero()) || !c.std.is_finite() {
                return bad(format!("density component {k} needs a positive standard deviation"));
            }
            if !c.weight.is_finite() || !c.mean.is_finite() {
                return bad(format!("density component {k} has non-finite parameters"));
            }
        }
        if let Some(g) = self.true_field().values().iter().position(|v| !(*v >= T::zero()) || !v.is_finite()) {
            let q = self.domain.grid_points()[g];
            return bad(format!("density is negative or non-finite at grid point ({}, {})", q.x, q.y));
        }
        let s = self.measurement.noise_std;
        if !(s >= T::zero()) || !s.is_finite() {
            return bad("measurement noise_std must be finite and nonnegative".into());
        }
        if !self.known_density && !(s > T::zero()) {
            return bad("learning requires noise_std > 0 (the kernel matrix is regularized by the noise variance)".into());
        }
        let sc = &self.search;
        if !(sc.tau_min > T::zero() && sc.tau_max >= sc.tau_min && sc.tau_default > T::zero()) || sc.grid_points == 0 {
            return bad("length-scale search needs 0 < tau_min <= tau_max, tau_default > 0 and at least one grid point".into());
        }
        if !(self.accept.threshold >= T::zero()) {
            return bad("exchange threshold must be nonnegative".into());
        }
        if self.oracle.restarts == 0 || self.oracle.max_sweeps == 0 || !(self.oracle.tolerance > T::zero()) {
            return bad("oracle needs restarts >= 1, max_sweeps >= 1 and a positive tolerance".into());
        }
        if !(self.density_floor > T::zero()) {
            return bad("density_floor must be positive".into());
        }
        Ok(())
    }
}

/// Uniform random positions in the domain, each at least `1e-3 x diameter` from the others.
pub fn initial_positions<T: Real, R: Rng + ?Sized>(domain: &ConvexDomain<T>, robots: usize, rng: &mut R) -> Vec<Point2<T>> {
    let v = domain.vertices();
    let (mut lo, mut hi) = (v[0], v[0]);
    for p in v {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let sep = T::lit(1e-3) * domain.diameter();
    let mut out: Vec<Point2<T>> = Vec::with_capacity(robots);
    while out.len() < robots {
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        let p = Point2::new(lo.x + (hi.x - lo.x) * T::lit(u), lo.y + (hi.y - lo.y) * T::lit(w));
        if domain.contains(p) && out.iter().all(|q| q.dist(p) >= sep) {
            out.push(p);
        }
    }
    out
}

/// Stream 0 of the run seed: initial positions.
pub fn placement_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Stream `robot + 1` of the run seed: that robot's measurement noise.
pub fn robot_rng(seed: u64, robot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(robot as u64 + 1);
    rng
}

/// Pointwise maximum of the robots' estimates.
pub fn compose_estimates<T: Real>(estimates: &[ScalarField2D<T>]) -> ScalarField2D<T> {
    let (first, rest) = estimates.split_first().expect("at least one estimate");
    let mut out = first.clone();
    for e in rest {
        assert!(e.same_grid(first), "estimates must share a grid");
        for (o, &v) in out.values_mut().iter_mut().zip(e.values()) {
            if v > *o {
                *o = v;
            }
        }
    }
    out
}

/// `integral |estimate - truth|` over the domain.
pub fn estimation_error<T: Real>(estimate: &ScalarField2D<T>, truth: &ScalarField2D<T>) -> Result<T, GeometryError> {
    integrate_abs_difference(estimate, truth)
}

/// Coverage cost of `positions` on the true density minus the oracle's best cost.
pub fn regret<T: Real>(positions: &[Point2<T>], truth: &ScalarField2D<T>, oracle_cost: T) -> T {
    coverage_cost(positions, truth) - oracle_cost
}
