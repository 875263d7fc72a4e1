#![allow(dead_code)]

use dvec_core::geometry::Point2;
use dvec_core::gp::{Sample, SampleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut impl Rng) -> Point2<f64> {
    Point2::new(rng.random(), rng.random())
}

/// Points in the unit square with pairwise separation at least `sep`.
pub fn separated_points(rng: &mut impl Rng, n: usize, sep: f64) -> Vec<Point2<f64>> {
    let mut out: Vec<Point2<f64>> = Vec::new();
    while out.len() < n {
        let p = random_point(rng);
        if out.iter().all(|q| q.dist(p) >= sep) {
            out.push(p);
        }
    }
    out
}

pub fn random_samples(rng: &mut impl Rng, n: usize) -> SampleSet<f64> {
    SampleSet::from_samples((0..n).map(|k| Sample {
        location: random_point(rng),
        value: rng.random_range(-1.0..2.0),
        origin_robot: k % 3,
        iteration: k,
    }))
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &[f64], n: usize) -> Vec<f64> {
    let w = 2 * n;
    let mut m = vec![0.0; n * w];
    for i in 0..n {
        m[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        m[i * w + n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i * w + c].abs().total_cmp(&m[j * w + c].abs())).unwrap();
        for k in 0..w {
            m.swap(c * w + k, p * w + k);
        }
        let d = m[c * w + c];
        for k in 0..w {
            m[c * w + k] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = m[i * w + c];
                if f != 0.0 {
                    for k in 0..w {
                        m[i * w + k] -= f * m[c * w + k];
                    }
                }
            }
        }
    }
    (0..n).flat_map(|i| m[i * w + n..(i + 1) * w].to_vec()).collect()
}

pub fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..a.len() / n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Direct kernel evaluation, independent of the library's.
pub fn se(a: Point2<f64>, b: Point2<f64>, tau: f64) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (-(dx * dx + dy * dy) / (2.0 * tau * tau)).exp()
}

pub fn dense_kernel(locs: &[Point2<f64>], tau: f64, noise: f64) -> Vec<f64> {
    let n = locs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = se(locs[i], locs[j], tau) + if i == j { noise } else { 0.0 };
        }
    }
    k
}
