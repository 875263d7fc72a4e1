mod common;

use common::*;
use dvec_core::comm::*;
use dvec_core::geometry::{compute_partition, ConvexDomain, Point2};
use dvec_core::gp::*;
use proptest::prelude::*;
use rand::Rng;

fn residual_norm(s: &SampleSet<f64>, extra: &Sample<f64>, rho: [f64; 2]) -> f64 {
    let mut r: Vec<f64> = s.locations().iter().zip(s.values()).map(|(p, y)| y - rho[0] * p.x - rho[1] * p.y).collect();
    r.push(extra.value - rho[0] * extra.location.x - rho[1] * extra.location.y);
    norm(&r)
}

#[test]
fn impact_bound_is_sound() {
    let mut r = rng(300);
    let mut triples = 0usize;
    let mut models = 0;
    while triples < 2000 && models < 1000 {
        models += 1;
        let s = random_samples(&mut r, 10);
        let hyper = Hyperparams::new([r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)], r.random_range(0.03..0.25));
        let noise = r.random_range(0.005..0.05);
        let without = GpModel::new(s.clone(), hyper, noise).unwrap();
        for c in 0..100 {
            let cand = Sample { location: random_point(&mut r), value: r.random_range(-1.0..2.0), origin_robot: 9, iteration: c };
            let b = impact_bound(&without, cand.location);
            if !b.valid {
                continue;
            }
            assert!(b.delta_k >= 0.0 && b.z_bound >= 0.0 && b.y_bound >= 0.0 && b.x_bound >= 0.0);
            assert_eq!(b.delta_k, b.x_bound.max(b.z_bound) + b.y_bound);
            let mut aug = s.clone();
            aug.insert(cand);
            let with = GpModel::new(aug.clone(), hyper, noise).unwrap();
            let yn = residual_norm(&s, &cand, hyper.rho);
            for _ in 0..20 {
                let x = random_point(&mut r);
                let kn = norm(&with.kernel_vector(x));
                let change = (with.mean(x) - without.mean(x)).abs();
                assert!(change <= kn * yn * b.delta_k * (1.0 + 1e-12) + 1e-15, "violation {change} > {}", kn * yn * b.delta_k);
                triples += 1;
            }
        }
    }
    assert!(triples >= 1000, "only {triples} valid triples");
}

#[test]
fn naive_counts_equal_delaunay_degrees() {
    let d = ConvexDomain::unit_square(100);
    let pos = separated_points(&mut rng(7), 7, 1e-3);
    let part = compute_partition(&pos, &d).unwrap();
    let fresh: Vec<Sample<f64>> =
        pos.iter().enumerate().map(|(i, &p)| Sample { location: p, value: 1.0, origin_robot: i, iteration: 1 }).collect();
    let mut stores: Vec<SampleSet<f64>> = fresh.iter().map(|&s| SampleSet::from_samples([s])).collect();
    let got = naive_exchange(&mut stores, &fresh, &part);
    for i in 0..7 {
        let degree = (0..7).filter(|&j| part.adjacent(i, j)).count();
        assert_eq!(got[i], degree);
        assert_eq!(stores[i].len(), 1 + degree);
    }
    let before = stores.clone();
    assert_eq!(naive_exchange(&mut stores, &fresh, &part), vec![0; 7]);
    let empty = vec![GpModel::prior(Hyperparams::zero_mean(0.2), 0.01); 7];
    let rule = AcceptRule::new(0.0, AcceptDirection::AtLeast);
    assert_eq!(constrained_exchange(&mut stores, &empty, &fresh, &part, rule), vec![0; 7]);
    for (a, b) in stores.iter().zip(&before) {
        assert_eq!(a.origins(), b.origins());
    }
}

/// A few rounds of exchange driven by a fixed input trajectory.
fn trajectory(rule: Option<AcceptRule<f64>>, seed: u64) -> (Vec<SampleSet<f64>>, TransferLedger) {
    let domain = ConvexDomain::unit_square(50);
    let mut r = rng(seed);
    let m = 6;
    let mut stores = vec![SampleSet::new(); m];
    let mut ledger = TransferLedger::new(m);
    for it in 0..6 {
        let pos = separated_points(&mut r, m, 0.01);
        let part = compute_partition(&pos, &domain).unwrap();
        let fresh: Vec<Sample<f64>> = pos
            .iter()
            .enumerate()
            .map(|(i, &p)| Sample { location: p, value: r.random_range(0.0..1.0), origin_robot: i, iteration: it })
            .collect();
        let models: Vec<GpModel<f64>> =
            stores.iter().map(|s| GpModel::new(s.clone(), Hyperparams::zero_mean(0.15), 0.01).unwrap()).collect();
        for (s, &f) in stores.iter_mut().zip(&fresh) {
            s.insert(f);
        }
        let got = match rule {
            None => naive_exchange(&mut stores, &fresh, &part),
            Some(rule) => constrained_exchange(&mut stores, &models, &fresh, &part, rule),
        };
        ledger.record(got);
    }
    (stores, ledger)
}

#[test]
fn constrained_rules_against_naive() {
    let (naive, naive_ledger) = trajectory(None, 1);
    let geq0 = AcceptRule::new(0.0, AcceptDirection::AtLeast);
    let (same, same_ledger) = trajectory(Some(geq0), 1);
    assert_eq!(naive_ledger, same_ledger);
    for (a, b) in naive.iter().zip(&same) {
        assert_eq!(a.origins(), b.origins());
    }

    let (_, none_ledger) = trajectory(Some(AcceptRule::new(f64::INFINITY, AcceptDirection::AtLeast)), 1);
    assert!(none_ledger.cumulative_team(5) < naive_ledger.cumulative_team(5));

    for rule in [
        AcceptRule::new(2.0, AcceptDirection::AtLeast),
        AcceptRule::new(2.0, AcceptDirection::AtMost),
        AcceptRule::new(2.0, AcceptDirection::AtMost).with_invalid(InvalidBoundPolicy::Infinite),
    ] {
        let (cc, ledger) = trajectory(Some(rule), 1);
        for (c, n) in cc.iter().zip(&naive) {
            for key in c.origins() {
                assert!(n.contains_key(*key), "{key:?} accepted by constrained only");
            }
        }
        for r in 1..ledger.rounds() {
            assert!(ledger.cumulative_team(r) >= ledger.cumulative_team(r - 1));
        }
    }
}

#[test]
fn infinite_threshold_passes_only_invalid_bounds() {
    let d = ConvexDomain::unit_square(40);
    let mut r = rng(12);
    for _ in 0..30 {
        let pos = separated_points(&mut r, 5, 0.01);
        let part = compute_partition(&pos, &d).unwrap();
        let fresh: Vec<Sample<f64>> =
            pos.iter().enumerate().map(|(i, &p)| Sample { location: p, value: 0.3, origin_robot: i, iteration: 9 }).collect();
        let models: Vec<GpModel<f64>> = (0..5)
            .map(|_| GpModel::new(random_samples(&mut r, 4), Hyperparams::zero_mean(r.random_range(0.02..0.3)), 0.01).unwrap())
            .collect();
        let mut stores: Vec<SampleSet<f64>> = models.iter().map(|m| m.samples().clone()).collect();
        let rule = AcceptRule::new(f64::INFINITY, AcceptDirection::AtLeast);
        let got = constrained_exchange(&mut stores, &models, &fresh, &part, rule);
        for i in 0..5 {
            let invalid = part.neighbors(i).iter().filter(|&&j| !impact_bound(&models[i], fresh[j].location).valid).count();
            assert_eq!(got[i], invalid);
        }
    }
}

#[test]
fn empty_model_accepts_everything() {
    let d = ConvexDomain::unit_square(20);
    let pos = [Point2::new(0.3, 0.3), Point2::new(0.7, 0.7)];
    let part = compute_partition(&pos, &d).unwrap();
    let fresh: Vec<Sample<f64>> =
        pos.iter().enumerate().map(|(i, &p)| Sample { location: p, value: 0.5, origin_robot: i, iteration: 0 }).collect();
    let mut stores = vec![SampleSet::new(); 2];
    let models = vec![GpModel::prior(Hyperparams::zero_mean(0.2), 0.01); 2];
    let rule = AcceptRule::new(f64::INFINITY, AcceptDirection::AtLeast);
    assert_eq!(constrained_exchange(&mut stores, &models, &fresh, &part, rule), vec![1, 1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_bound_factors(seed in 0u64..10_000, n in 1usize..12, tau in 0.02f64..0.5, cx in 0.0f64..1.0, cy in 0.0f64..1.0) {
        let s = random_samples(&mut rng(seed), n);
        let m = GpModel::new(s, Hyperparams::zero_mean(tau), 0.01).unwrap();
        let b = impact_bound(&m, Point2::new(cx, cy));
        if b.valid {
            prop_assert!(b.delta_k >= 1.0 - 1e-12);
            prop_assert!(b.z_bound >= 1.0 - 1e-12);
            prop_assert!(b.y_bound >= 0.0 && b.x_bound >= 0.0);
        } else {
            prop_assert!(b.delta_k.is_infinite());
        }
    }

    #[test]
    fn prop_ledger_monotone(rounds in prop::collection::vec(prop::collection::vec(0usize..5, 3), 1..10)) {
        let mut l = TransferLedger::new(3);
        for r in &rounds {
            l.record(r.clone());
        }
        for r in 1..l.rounds() {
            prop_assert!(l.cumulative_team(r) >= l.cumulative_team(r - 1));
            let (a, b) = (l.cumulative_per_robot(r), l.cumulative_per_robot(r - 1));
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x >= y));
        }
    }
}
