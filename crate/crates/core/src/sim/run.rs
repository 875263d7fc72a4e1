use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::{
    compose_estimates, estimation_error, initial_positions, placement_rng, regret, robot_rng, IterationMetrics, PhaseTimings, RunMetrics,
    RunMode, ScenarioConfig, SimError, WarnFlags,
};
use crate::agent::{goal_point, lower_confidence_from_fields, motion_step, take_sample, RobotState};
use crate::comm::{constrained_exchange, naive_exchange, AcceptRule, TransferLedger};
use crate::geometry::{
    argmax_in_cell, cell_moments_all, cell_moments_each, compute_partition, CellMoments, Point2, ScalarField2D, VoronoiPartition,
};
use crate::gp::{fit_hyperparams, GpModel, Hyperparams, Sample, SampleSet};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct RunOutput<T: Real> {
    pub metrics: RunMetrics<T>,
    /// Final robot states. In centralized mode every robot carries the shared model.
    pub robots: Vec<RobotState<T>>,
    pub truth: ScalarField2D<T>,
    /// Pointwise maximum of the final estimates.
    pub composite: ScalarField2D<T>,
    pub ledger: TransferLedger,
}

/// Knowledge held by one learner: the central unit, or one robot.
struct Learners<T: Real> {
    sets: Vec<SampleSet<T>>,
    models: Vec<GpModel<T>>,
    means: Vec<ScalarField2D<T>>,
    stds: Vec<ScalarField2D<T>>,
}

/// Runs one seeded scenario in `mode`.
///
/// `oracle_cost` is the reference coverage cost on the true density, used for regret.
pub fn run<T: Real>(config: &ScenarioConfig<T>, mode: RunMode, seed: u64, oracle_cost: T) -> Result<RunOutput<T>, SimError> {
    config.validate()?;
    let domain = &config.domain;
    let m = config.robots;
    let truth = config.true_field();
    let meas = config.measurement;
    let noise_var = meas.noise_var();
    let schedule = &config.schedule;
    let shared = mode == RunMode::Centralized;
    let learner_of = |i: usize| if shared { 0 } else { i };
    let n_learners = if shared { 1 } else { m };

    let mut rngs: Vec<ChaCha8Rng> = (0..m).map(|i| robot_rng(seed, i)).collect();
    let mut positions = initial_positions(domain, m, &mut placement_rng(seed));

    let prior = GpModel::prior(Hyperparams::zero_mean(config.search.tau_default), noise_var);
    let mut learners =
        Learners { sets: vec![SampleSet::new(); n_learners], models: vec![prior; n_learners], means: Vec::new(), stds: Vec::new() };
    let mut ledger = TransferLedger::new(m);

    let fresh: Vec<Sample<T>> = (0..m).map(|i| take_sample(i, positions[i], 0, &truth, &meas, &mut rngs[i])).collect();
    let mut partition = compute_partition(&positions, domain)?;
    let (initial_offered, received) = exchange(mode, &mut learners, &fresh, &partition, config.accept);
    let initial_accepted = received.iter().sum();
    ledger.record(received);
    refit(config, &mut learners, &truth)?;

    let mut iterations = Vec::with_capacity(schedule.iterations());
    let mut estimates = Vec::new();
    for n in 1..=schedule.iterations() {
        let mut warn = WarnFlags::NONE;
        let mut timings = PhaseTimings::default();
        let t = Instant::now();

        let beta = schedule.beta(n);
        let gamma = schedule.gamma(n);
        estimates = learners.means.iter().zip(&learners.stds).map(|(mu, sd)| lower_confidence_from_fields(mu, sd, beta)).collect();
        let composite = if shared { estimates[0].clone() } else { compose_estimates(&estimates) };
        let error = estimation_error(&composite, &truth)?;
        let control: Vec<ScalarField2D<T>> = estimates.iter().map(|e| e.clamped_min(config.density_floor)).collect();

        let explore: Vec<Point2<T>> = (0..m)
            .map(|i| {
                argmax_in_cell(&partition.cells[i], &learners.stds[learner_of(i)]).unwrap_or_else(|_| {
                    warn.insert(WarnFlags::DEGENERATE_CENTROID);
                    positions[i]
                })
            })
            .collect();
        timings.estimate = t.elapsed();

        let t = Instant::now();
        let control_refs: Vec<&ScalarField2D<T>> = (0..m).map(|i| &control[learner_of(i)]).collect();
        let moments = |pos: &[Point2<T>]| -> Vec<CellMoments<T>> {
            if shared {
                cell_moments_all(pos, &control[0])
            } else {
                cell_moments_each(pos, &control_refs)
            }
        };
        let mut steps = 0;
        loop {
            let mom = moments(&positions);
            if mom.iter().any(|c| c.degenerate) {
                warn.insert(WarnFlags::DEGENERATE_CENTROID);
            }
            let goals: Vec<Point2<T>> = mom.iter().zip(&explore).map(|(c, &e)| goal_point(c.centroid, e, gamma)).collect();
            if positions.iter().zip(&goals).all(|(p, g)| p.dist(*g) < schedule.eps_conv) {
                break;
            }
            if steps == schedule.max_steps {
                warn.insert(WarnFlags::INNER_CAP);
                break;
            }
            for (p, &g) in positions.iter_mut().zip(&goals) {
                *p = motion_step(*p, g, schedule.kappa, schedule.dt, domain);
            }
            steps += 1;
        }
        timings.inner_loop = t.elapsed();

        let t = Instant::now();
        let fresh: Vec<Sample<T>> = (0..m).map(|i| take_sample(i, positions[i], n, &truth, &meas, &mut rngs[i])).collect();
        partition = compute_partition(&positions, domain)?;
        let (offered, received) = exchange(mode, &mut learners, &fresh, &partition, config.accept);
        let accepted = received.iter().sum();
        ledger.record(received);
        timings.exchange = t.elapsed();

        let t = Instant::now();
        refit(config, &mut learners, &truth)?;
        timings.fit = t.elapsed();

        let r = regret(&positions, &truth, oracle_cost);
        if r < T::zero() {
            warn.insert(WarnFlags::NEGATIVE_REGRET);
        }
        let round = ledger.rounds() - 1;
        let team = ledger.cumulative_team(round);
        iterations.push(IterationMetrics {
            iteration: n,
            error,
            regret: r,
            team_cumulative_transfers: team,
            per_robot_cumulative_transfers: ledger.cumulative_per_robot(round),
            mean_per_robot_transfers: T::from_index(team) / T::from_index(m),
            offered,
            accepted,
            inner_loop_steps: steps,
            warn,
            timings,
        });
    }

    let composite = if shared { estimates[0].clone() } else { compose_estimates(&estimates) };
    let robots = rngs
        .into_iter()
        .enumerate()
        .map(|(i, rng)| {
            let l = learner_of(i);
            RobotState {
                id: i,
                position: positions[i],
                samples: learners.sets[l].clone(),
                model: learners.models[l].clone(),
                posterior_mean: learners.means[l].clone(),
                posterior_std: learners.stds[l].clone(),
                estimate: estimates[l].clone(),
                goal_centroid: positions[i],
                goal_explore: positions[i],
                rng,
            }
        })
        .collect();
    Ok(RunOutput { metrics: RunMetrics { mode, seed, initial_offered, initial_accepted, iterations }, robots, truth, composite, ledger })
}

/// Adds this round's samples to the learners. Returns the number of foreign
/// samples offered and the per-robot accepted counts.
///
/// In centralized mode every robot is credited with the `M - 1` samples the
/// shared model gives it access to.
fn exchange<T: Real>(
    mode: RunMode,
    learners: &mut Learners<T>,
    fresh: &[Sample<T>],
    partition: &VoronoiPartition<T>,
    rule: AcceptRule<T>,
) -> (usize, Vec<usize>) {
    let m = fresh.len();
    match mode {
        RunMode::Centralized => {
            for &s in fresh {
                learners.sets[0].insert(s);
            }
            (m * (m - 1), vec![m - 1; m])
        }
        RunMode::NaiveExchange | RunMode::ConstrainedExchange => {
            for (set, &s) in learners.sets.iter_mut().zip(fresh) {
                set.insert(s);
            }
            let offered = (0..m).map(|i| partition.neighbors(i).len()).sum();
            let received = if mode == RunMode::NaiveExchange {
                naive_exchange(&mut learners.sets, fresh, partition)
            } else {
                constrained_exchange(&mut learners.sets, &learners.models, fresh, partition, rule)
            };
            (offered, received)
        }
    }
}

fn refit<T: Real>(config: &ScenarioConfig<T>, learners: &mut Learners<T>, truth: &ScalarField2D<T>) -> Result<(), SimError> {
    let noise_var = config.measurement.noise_var();
    learners.means.clear();
    learners.stds.clear();
    for (set, model) in learners.sets.iter().zip(learners.models.iter_mut()) {
        if config.known_density {
            learners.means.push(truth.clone());
            learners.stds.push(truth.map(|_| T::zero()));
            continue;
        }
        let hyper = fit_hyperparams(set, noise_var, &config.search);
        *model = GpModel::new(set.clone(), hyper, noise_var)?;
        let (mu, sd) = model.field(&config.domain);
        learners.means.push(mu);
        learners.stds.push(sd);
    }
    Ok(())
}
