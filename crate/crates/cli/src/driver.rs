//! Runs every (density, mode, seed) combination of an experiment on a bounded thread pool.

use dvec_core::comm::{AcceptDirection, AcceptRule};
use dvec_core::geometry::ScalarField2D;
use dvec_core::sim::{cvt_oracle, run, OracleResult, RunMetrics, RunMode, ScenarioConfig, SimError};
use rayon::prelude::*;
use rayon::ThreadPool;
use thiserror::Error;

use crate::config::{ExperimentSpec, FieldExport};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("density `{density}`, {mode}, seed {seed}: {source}")]
    Run { density: String, mode: RunMode, seed: u64, source: SimError },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("no threshold candidate cuts {target:.0}% of naive transfers")]
    Calibration { target: f64 },
}

/// Final fields of one run.
#[derive(Clone, Debug)]
pub struct RunFields {
    /// Each robot's estimate ordered by robot id (one shared estimate for VEC).
    pub robots: Vec<ScalarField2D<f64>>,
    pub composite: ScalarField2D<f64>,
    pub truth: ScalarField2D<f64>,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub density_id: String,
    pub metrics: RunMetrics<f64>,
    pub fields: Option<RunFields>,
}

#[derive(Clone, Debug)]
pub struct OracleRecord {
    pub density_id: String,
    pub result: OracleResult<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub oracles: Vec<OracleRecord>,
    /// Ordered by density (config order), mode, seed (config order).
    pub runs: Vec<RunRecord>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one run; the same for every mode so modes see identical placements and noise.
pub fn run_seed(experiment_seed: u64, density_index: usize, seed: u64) -> u64 {
    splitmix(splitmix(splitmix(experiment_seed) ^ density_index as u64) ^ seed)
}

pub fn oracle_seed(experiment_seed: u64, density_index: usize) -> u64 {
    splitmix(splitmix(experiment_seed ^ 0x6F72_6163_6C65) ^ density_index as u64)
}

pub fn thread_pool(parallelism: usize) -> Result<ThreadPool, DriverError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build()?)
}

/// One oracle per density, in config order.
pub fn compute_oracles(spec: &ExperimentSpec, pool: &ThreadPool) -> Vec<OracleRecord> {
    pool.install(|| {
        spec.scenarios
            .par_iter()
            .enumerate()
            .map(|(d, s)| OracleRecord {
                density_id: s.id.clone(),
                result: cvt_oracle(&s.config.true_field(), s.config.robots, &s.config.oracle, oracle_seed(spec.experiment_seed, d)),
            })
            .collect()
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, DriverError> {
    let pool = thread_pool(spec.parallelism)?;
    let oracles = compute_oracles(spec, &pool);
    let mut jobs = Vec::with_capacity(spec.run_count());
    for d in 0..spec.scenarios.len() {
        for &mode in &spec.modes {
            for (k, &seed) in spec.seeds.iter().enumerate() {
                let export = match spec.export_fields {
                    FieldExport::None => false,
                    FieldExport::FirstSeed => k == 0,
                    FieldExport::All => true,
                };
                jobs.push((d, mode, seed, export));
            }
        }
    }
    let runs = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, mode, seed, export)| {
                let s = &spec.scenarios[d];
                let run_seed = run_seed(spec.experiment_seed, d, seed);
                let out = run(&s.config, mode, run_seed, oracles[d].result.best_cost).map_err(|source| DriverError::Run {
                    density: s.id.clone(),
                    mode,
                    seed,
                    source,
                })?;
                let mut metrics = out.metrics;
                metrics.seed = seed;
                let fields = export.then(|| RunFields {
                    robots: out.robots.into_iter().map(|r| r.estimate).collect(),
                    composite: out.composite,
                    truth: out.truth,
                });
                Ok(RunRecord { density_id: s.id.clone(), metrics, fields })
            })
            .collect::<Result<Vec<_>, DriverError>>()
    })?;
    Ok(ExperimentResult { oracles, runs })
}

/// Threshold grid searched by [`calibrate_threshold`]: 1e-2 to 1e3, three points per decade.
pub fn threshold_candidates() -> Vec<f64> {
    (-2..=3).flat_map(|e| [1.0, 2.0, 5.0].map(|m| m * 10f64.powi(e))).filter(|&t| t <= 1e3).collect()
}

/// Mean final team transfers of `config` over `seeds` under `mode`.
pub fn mean_final_transfers(
    config: &ScenarioConfig<f64>,
    mode: RunMode,
    run_seeds: &[u64],
    oracle_cost: f64,
    pool: &ThreadPool,
) -> Result<f64, SimError> {
    let totals = pool.install(|| {
        run_seeds
            .par_iter()
            .map(|&s| run(config, mode, s, oracle_cost).map(|o| o.metrics.iterations.last().map_or(0, |m| m.team_cumulative_transfers)))
            .collect::<Result<Vec<_>, SimError>>()
    })?;
    Ok(totals.iter().sum::<usize>() as f64 / totals.len().max(1) as f64)
}

/// Least restrictive threshold among `candidates` whose constrained runs cut at least
/// `target_cut` (a fraction) of the naive runs' final team transfers.
///
/// "Least restrictive" is the largest candidate for [`AcceptDirection::AtMost`] and the
/// smallest for [`AcceptDirection::AtLeast`]. The rule's direction and invalid-bound
/// policy are taken from `config.accept`.
pub fn calibrate_threshold(
    config: &ScenarioConfig<f64>,
    run_seeds: &[u64],
    oracle_cost: f64,
    candidates: &[f64],
    target_cut: f64,
    pool: &ThreadPool,
) -> Result<f64, DriverError> {
    let sim_err = |source| DriverError::Run { density: "calibration".into(), mode: RunMode::ConstrainedExchange, seed: 0, source };
    let naive = mean_final_transfers(config, RunMode::NaiveExchange, run_seeds, oracle_cost, pool).map_err(sim_err)?;
    let mut order: Vec<f64> = candidates.to_vec();
    order.sort_by(|a, b| a.total_cmp(b));
    if config.accept.direction == AcceptDirection::AtMost {
        order.reverse();
    }
    for theta in order {
        let mut c = config.clone();
        c.accept = AcceptRule { threshold: theta, ..config.accept };
        let cc = mean_final_transfers(&c, RunMode::ConstrainedExchange, run_seeds, oracle_cost, pool).map_err(sim_err)?;
        if cc <= (1.0 - target_cut) * naive {
            return Ok(theta);
        }
    }
    Err(DriverError::Calibration { target: target_cut * 100.0 })
}
