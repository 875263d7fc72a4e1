use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::initial_positions;
use crate::geometry::{cell_moments_all, coverage_cost, Point2, ScalarField2D};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig<T> {
    pub restarts: usize,
    /// Lloyd stops once no generator moves farther than this in a sweep.
    pub tolerance: T,
    pub max_sweeps: usize,
}

impl<T: Real> Default for OracleConfig<T> {
    fn default() -> Self {
        OracleConfig { restarts: 50, tolerance: T::lit(1e-6), max_sweeps: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LloydRun<T> {
    pub positions: Vec<Point2<T>>,
    /// Cost of the initial configuration followed by the cost after each sweep.
    pub costs: Vec<T>,
    pub converged: bool,
}

impl<T: Real> LloydRun<T> {
    pub fn cost(&self) -> T {
        *self.costs.last().expect("at least the initial cost")
    }

    pub fn sweeps(&self) -> usize {
        self.costs.len() - 1
    }
}

/// Discrete Lloyd iteration on a fixed density: every generator jumps to its cell centroid.
pub fn lloyd<T: Real>(density: &ScalarField2D<T>, init: Vec<Point2<T>>, tolerance: T, max_sweeps: usize) -> LloydRun<T> {
    let mut positions = init;
    let mut costs = vec![coverage_cost(&positions, density)];
    let mut converged = false;
    for _ in 0..max_sweeps {
        let moments = cell_moments_all(&positions, density);
        let mut moved = T::zero();
        for (p, m) in positions.iter_mut().zip(&moments) {
            moved = moved.max(p.dist(m.centroid));
            *p = m.centroid;
        }
        costs.push(coverage_cost(&positions, density));
        if moved < tolerance {
            converged = true;
            break;
        }
    }
    LloydRun { positions, costs, converged }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub best_cost: T,
    pub best_positions: Vec<Point2<T>>,
    pub restart_costs: Vec<T>,
}

/// Best Lloyd fixed point over `config.restarts` random initializations.
///
/// Restart `r` draws its start from stream `r` of a generator seeded with `seed`.
pub fn cvt_oracle<T: Real>(density: &ScalarField2D<T>, robots: usize, config: &OracleConfig<T>, seed: u64) -> OracleResult<T> {
    assert!(config.restarts >= 1, "at least one restart");
    let domain = density.domain();
    let mut best: Option<LloydRun<T>> = None;
    let mut restart_costs = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let init = initial_positions(domain, robots, &mut rng);
        let run = lloyd(density, init, config.tolerance, config.max_sweeps);
        restart_costs.push(run.cost());
        if best.as_ref().map(|b| run.cost() < b.cost()).unwrap_or(true) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    OracleResult { best_cost: best.cost(), best_positions: best.positions, restart_costs }
}
