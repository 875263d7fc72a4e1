mod common;

use std::sync::Arc;

use common::*;
use dvec_core::geometry::{ConvexDomain, Point2};
use dvec_core::gp::*;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

struct Dense {
    inv: Vec<f64>,
    locs: Vec<Point2<f64>>,
    resid: Vec<f64>,
    hyper: Hyperparams<f64>,
}

impl Dense {
    fn new(s: &SampleSet<f64>, hyper: Hyperparams<f64>, noise: f64) -> Self {
        let locs = s.locations().to_vec();
        let inv = gauss_jordan_inverse(&dense_kernel(&locs, hyper.tau, noise), locs.len());
        let resid = locs.iter().zip(s.values()).map(|(p, y)| y - (hyper.rho[0] * p.x + hyper.rho[1] * p.y)).collect();
        Dense { inv, locs, resid, hyper }
    }

    fn kvec(&self, x: Point2<f64>) -> Vec<f64> {
        self.locs.iter().map(|&p| se(x, p, self.hyper.tau)).collect()
    }

    fn mean(&self, x: Point2<f64>) -> f64 {
        self.hyper.rho[0] * x.x + self.hyper.rho[1] * x.y + dot(&self.kvec(x), &matvec(&self.inv, &self.resid))
    }

    fn std(&self, x: Point2<f64>) -> f64 {
        let k = self.kvec(x);
        (1.0 - dot(&k, &matvec(&self.inv, &k))).max(0.0).sqrt()
    }
}

fn dense_nlml(s: &SampleSet<f64>, hyper: Hyperparams<f64>, noise: f64) -> f64 {
    let n = s.len();
    let a = dense_kernel(s.locations(), hyper.tau, noise);
    // log-determinant by unpivoted LU (A is SPD)
    let mut lu = a.clone();
    let mut logdet = 0.0;
    for c in 0..n {
        let d = lu[c * n + c];
        logdet += d.ln();
        for i in c + 1..n {
            let f = lu[i * n + c] / d;
            for k in c..n {
                lu[i * n + k] -= f * lu[c * n + k];
            }
        }
    }
    let d = Dense::new(s, hyper, noise);
    logdet + dot(&d.resid, &matvec(&d.inv, &d.resid))
}

#[test]
fn posterior_matches_explicit_inverse() {
    let mut r = rng(100);
    for inst in 0..100 {
        let n = 1 + inst % 50;
        let s = random_samples(&mut r, n);
        let hyper = Hyperparams::new([r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)], r.random_range(0.05..0.6));
        let noise = r.random_range(0.005..0.05);
        let m = GpModel::new(s.clone(), hyper, noise).unwrap();
        let d = Dense::new(&s, hyper, noise);
        for _ in 0..10 {
            let x = random_point(&mut r);
            assert!((m.mean(x) - d.mean(x)).abs() < 1e-8, "mean n={n}");
            assert!((m.std(x) - d.std(x)).abs() < 1e-8, "std n={n}");
            assert!(m.std(x) <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn nlml_matches_explicit_inverse() {
    let mut r = rng(101);
    for _ in 0..20 {
        let s = random_samples(&mut r, 5);
        let hyper = Hyperparams::new([r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)], r.random_range(0.05..0.6));
        let v = neg_log_marginal_likelihood(&s, hyper, 0.01).unwrap();
        assert!((v - dense_nlml(&s, hyper, 0.01)).abs() < 1e-8);
    }
}

#[test]
fn field_equals_pointwise_calls() {
    let domain = Arc::new(ConvexDomain::unit_square(100));
    let mut r = rng(102);
    let s = random_samples(&mut r, 30);
    let m = GpModel::new(s, Hyperparams::new([0.3, -0.2], 0.2), 0.01).unwrap();
    let (mu, sd) = m.field(&domain);
    for _ in 0..20 {
        let g = r.random_range(0..domain.num_grid_points());
        let q = domain.grid_points()[g];
        assert_eq!(mu.get(g), m.mean(q));
        assert_eq!(sd.get(g), m.std(q));
    }
    let prior = GpModel::prior(Hyperparams::new([0.5, 0.25], 0.2), 0.01);
    let (mu, sd) = prior.field(&domain);
    for (g, q) in domain.grid_points().iter().enumerate() {
        assert_eq!(mu.get(g), 0.5 * q.x + 0.25 * q.y);
        assert_eq!(sd.get(g), 1.0);
    }
}

#[test]
fn fit_beats_brute_force_grid() {
    let mut r = rng(103);
    let noise = 0.01;
    let search = SearchConfig::for_diameter(2f64.sqrt());
    for _ in 0..3 {
        let s = random_samples(&mut r, 5);
        let h = fit_hyperparams(&s, noise, &search);
        let best = neg_log_marginal_likelihood(&s, h, noise).unwrap();
        let taus: Vec<f64> =
            (0..50).map(|k| (search.tau_min.ln() + (search.tau_max.ln() - search.tau_min.ln()) * k as f64 / 49.0).exp()).collect();
        let rhos: Vec<f64> = (0..50).map(|k| -6.0 + 12.0 * k as f64 / 49.0).collect();
        let mut grid_min = f64::INFINITY;
        for &tau in &taus {
            // one factorization per tau; the quadratic form is evaluated for each rho pair
            let d = Dense::new(&s, Hyperparams::zero_mean(tau), noise);
            let logdet = dense_nlml(&s, Hyperparams::new([0.0, 0.0], tau), noise) - dot(&d.resid, &matvec(&d.inv, &d.resid));
            for &r0 in &rhos {
                for &r1 in &rhos {
                    let res: Vec<f64> = s.locations().iter().zip(s.values()).map(|(p, y)| y - r0 * p.x - r1 * p.y).collect();
                    grid_min = grid_min.min(logdet + dot(&res, &matvec(&d.inv, &res)));
                }
            }
        }
        assert!(best <= grid_min + 1e-6, "fit {best} vs grid {grid_min}");
    }
}

#[test]
fn recovers_length_scale_from_synthetic_gp() {
    let tau0 = 0.2;
    let noise = 0.01;
    let search = SearchConfig::for_diameter(2f64.sqrt());
    let mut total = 0.0;
    for seed in 0..20 {
        let mut r = rng(500 + seed);
        let locs = separated_points(&mut r, 10, 0.05);
        let a = dense_kernel(&locs, tau0, noise);
        // draw y ~ N(0, A) through a hand-rolled Cholesky factor
        let n = locs.len();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
                l[i * n + j] = if i == j { (a[i * n + i] - s).sqrt() } else { (a[i * n + j] - s) / l[j * n + j] };
            }
        }
        let z: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        let y = matvec(&l, &z);
        let s = SampleSet::from_samples(locs.iter().zip(&y).enumerate().map(|(k, (&p, &v))| Sample {
            location: p,
            value: v,
            origin_robot: 0,
            iteration: k,
        }));
        total += fit_hyperparams(&s, noise, &search).tau;
    }
    let mean = total / 20.0;
    assert!(mean > tau0 / 2.0 && mean < tau0 * 2.0, "mean tau {mean}");
}

#[test]
fn interpolates_nearly_noiseless_data() {
    let mut r = rng(104);
    let s = random_samples(&mut r, 8);
    let m = GpModel::new(s.clone(), Hyperparams::new([0.2, 0.1], 0.1), 1e-8).unwrap();
    for smp in s.iter() {
        assert!((m.mean(smp.location) - smp.value).abs() < 1e-3);
    }
}

#[test]
fn gls_slope_never_worse_than_zero_slope() {
    let mut r = rng(105);
    for _ in 0..30 {
        let s = random_samples(&mut r, 12);
        let tau = r.random_range(0.05..1.0);
        let rho = profiled_mean_slope(&s, tau, 0.01).unwrap();
        let with = neg_log_marginal_likelihood(&s, Hyperparams::new(rho, tau), 0.01).unwrap();
        let without = neg_log_marginal_likelihood(&s, Hyperparams::zero_mean(tau), 0.01).unwrap();
        assert!(with <= without + 1e-9);
    }
}

#[test]
fn kernel_matrix_is_exactly_symmetric() {
    let s = random_samples(&mut rng(106), 25);
    let a = regularized_kernel_matrix(s.locations(), 0.3, 0.01);
    for i in 0..25 {
        for j in 0..25 {
            assert_eq!(a[i * 25 + j], a[j * 25 + i]);
        }
    }
}

#[test]
fn kernel_and_mean_direct_evaluation() {
    let mut r = rng(107);
    for _ in 0..100 {
        let (a, b) = (random_point(&mut r), random_point(&mut r));
        let tau = r.random_range(0.01..2.0);
        assert!((kernel(a, b, tau) - se(a, b, tau)).abs() < 1e-12);
        let rho = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
        assert!((mean_prior(a, rho) - (rho[0] * a.x + rho[1] * a.y)).abs() < 1e-14);
    }
    let p = Point2::new(0.1, 0.2);
    assert!((kernel(p, Point2::new(0.1 + 0.3 * 2f64.sqrt(), 0.2), 0.3) - (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn single_sample_closed_forms() {
    let x0 = Point2::new(0.3, 0.4);
    let rho = [0.5, -0.5];
    let s2 = 0.04f64;
    let s = SampleSet::from_samples([Sample { location: x0, value: 2.0, origin_robot: 0, iteration: 0 }]);
    let m = GpModel::new(s, Hyperparams::new(rho, 0.2), s2).unwrap();
    let mu0 = mean_prior(x0, rho);
    assert!((m.mean(x0) - (mu0 + (2.0 - mu0) / (1.0 + s2))).abs() < 1e-14);
    assert!((m.std(x0) - (1.0 - 1.0 / (1.0 + s2)).sqrt()).abs() < 1e-14);
}

#[test]
fn field_performance_30_samples() {
    let domain = Arc::new(ConvexDomain::unit_square(100));
    let s = random_samples(&mut rng(108), 30);
    let m = GpModel::new(s, Hyperparams::new([0.0, 0.0], 0.2), 0.01).unwrap();
    let t = std::time::Instant::now();
    let _ = m.field(&domain);
    assert!(t.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn f32_model_tracks_f64() {
    let s = random_samples(&mut rng(109), 10);
    let s32 = SampleSet::from_samples(s.iter().map(|x| Sample {
        location: Point2::new(x.location.x as f32, x.location.y as f32),
        value: x.value as f32,
        origin_robot: x.origin_robot,
        iteration: x.iteration,
    }));
    let m64 = GpModel::new(s, Hyperparams::zero_mean(0.3), 0.05).unwrap();
    let m32 = GpModel::new(s32, Hyperparams::zero_mean(0.3f32), 0.05).unwrap();
    let q = Point2::new(0.4, 0.6);
    assert!((m64.mean(q) - m32.mean(Point2::new(0.4, 0.6)) as f64).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_adding_sample_never_increases_variance(
        seed in 0u64..10_000, n in 1usize..15, tau in 0.05f64..0.8, qx in 0.0f64..1.0, qy in 0.0f64..1.0,
    ) {
        let mut r = rng(seed);
        let s = random_samples(&mut r, n + 1);
        let all: Vec<Sample<f64>> = s.iter().collect();
        let fewer = SampleSet::from_samples(all[..n].iter().copied());
        let h = Hyperparams::new([0.1, 0.2], tau);
        let a = GpModel::new(fewer, h, 0.01).unwrap();
        let b = GpModel::new(s, h, 0.01).unwrap();
        let q = Point2::new(qx, qy);
        prop_assert!(b.variance(q) <= a.variance(q) + 1e-9);
        prop_assert!(a.std(q) <= 1.0 + 1e-9);
    }

    #[test]
    fn prop_fit_stays_in_bounds(seed in 0u64..10_000, n in 3usize..12) {
        let s = random_samples(&mut rng(seed), n);
        let search = SearchConfig::for_diameter(1.0);
        let h = fit_hyperparams(&s, 0.01, &search);
        prop_assert!(h.tau >= search.tau_min * 0.999 && h.tau <= search.tau_max * 1.001);
        prop_assert!(h.rho.iter().all(|v| v.is_finite()));
    }
}
