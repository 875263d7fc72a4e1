//! Maximum-likelihood hyperparameters.
//!
//! The linear mean enters the likelihood quadratically, so for each length
//! scale the optimal slope has a closed form (generalized least squares). The
//! remaining one-dimensional problem in `tau` is solved by a log-spaced grid
//! followed by golden-section refinement of every grid-local minimum.

use super::linalg::Cholesky;
use super::model::regularized_kernel_matrix;
use super::{mean_prior, GpError, Hyperparams, SampleSet};
use crate::geometry::Point2;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig<T> {
    pub tau_min: T,
    pub tau_max: T,
    /// Number of log-spaced candidates in `[tau_min, tau_max]`.
    pub grid_points: usize,
    /// Length scale used when there are too few samples to fit.
    pub tau_default: T,
    /// Golden-section stopping width in `ln tau`.
    pub log_tol: T,
}

impl<T: Real> SearchConfig<T> {
    /// Bounds `[0.02, 2.0] x diameter` with 40 grid points.
    pub fn for_diameter(diameter: T) -> Self {
        SearchConfig {
            tau_min: T::lit(0.02) * diameter,
            tau_max: T::lit(2.0) * diameter,
            grid_points: 40,
            tau_default: T::lit(0.15) * diameter,
            log_tol: T::lit(1e-6),
        }
    }

    pub fn grid(&self) -> Vec<T> {
        let n = self.grid_points.max(1);
        if n == 1 {
            return vec![self.tau_min];
        }
        let (a, b) = (self.tau_min.ln(), self.tau_max.ln());
        (0..n).map(|k| (a + (b - a) * T::from_index(k) / T::from_index(n - 1)).exp()).collect()
    }
}

/// `log|K + s I| + (mu - y)^T (K + s I)^{-1} (mu - y)`
pub fn neg_log_marginal_likelihood<T: Real>(samples: &SampleSet<T>, hyper: Hyperparams<T>, noise_var: T) -> Result<T, GpError> {
    if samples.is_empty() {
        return Err(GpError::NoSamples);
    }
    let n = samples.len();
    let a = regularized_kernel_matrix(samples.locations(), hyper.tau, noise_var);
    let f = Cholesky::new(&a, n).map_err(|e| GpError::NotPositiveDefinite { pivot: e.pivot })?;
    let r: Vec<T> = samples.locations().iter().zip(samples.values()).map(|(&x, &y)| mean_prior(x, hyper.rho) - y).collect();
    Ok(f.log_det() + f.quad_form(&r))
}

struct Profile<T> {
    nlml: T,
    rho: [T; 2],
}

fn profile<T: Real>(locs: &[Point2<T>], ys: &[T], tau: T, noise_var: T, use_gls: bool) -> Option<Profile<T>> {
    let n = locs.len();
    let a = regularized_kernel_matrix(locs, tau, noise_var);
    let f = Cholesky::new(&a, n).ok()?;
    let rho = if use_gls { gls_slope(&f, locs, ys) } else { [T::zero(), T::zero()] };
    let r: Vec<T> = locs.iter().zip(ys).map(|(&x, &y)| mean_prior(x, rho) - y).collect();
    let nlml = f.log_det() + f.quad_form(&r);
    nlml.is_finite().then_some(Profile { nlml, rho })
}

/// `(X^T A^{-1} X)^{-1} X^T A^{-1} y`, or zero when the normal matrix is singular.
fn gls_slope<T: Real>(f: &Cholesky<T>, locs: &[Point2<T>], ys: &[T]) -> [T; 2] {
    let xs: Vec<T> = locs.iter().map(|p| p.x).collect();
    let yc: Vec<T> = locs.iter().map(|p| p.y).collect();
    let wx = f.solve(&xs);
    let wy = f.solve(&yc);
    let dot = |u: &[T], v: &[T]| u.iter().zip(v).map(|(&p, &q)| p * q).sum::<T>();
    let m00 = dot(&xs, &wx);
    let m01 = dot(&xs, &wy);
    let m11 = dot(&yc, &wy);
    let b0 = dot(&wx, ys);
    let b1 = dot(&wy, ys);
    let det = m00 * m11 - m01 * m01;
    if !(det > T::lit(1e-12) * m00 * m11) {
        return [T::zero(), T::zero()];
    }
    [(m11 * b0 - m01 * b1) / det, (m00 * b1 - m01 * b0) / det]
}

fn collinear<T: Real>(locs: &[Point2<T>]) -> bool {
    let n = T::from_index(locs.len());
    let (mut mx, mut my) = (T::zero(), T::zero());
    for p in locs {
        mx = mx + p.x;
        my = my + p.y;
    }
    mx = mx / n;
    my = my / n;
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for p in locs {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    let tr = sxx + syy;
    !(sxx * syy - sxy * sxy > T::lit(1e-10) * tr * tr)
}

/// GLS slope for a fixed length scale.
pub fn profiled_mean_slope<T: Real>(samples: &SampleSet<T>, tau: T, noise_var: T) -> Result<[T; 2], GpError> {
    if samples.is_empty() {
        return Err(GpError::NoSamples);
    }
    let a = regularized_kernel_matrix(samples.locations(), tau, noise_var);
    let f = Cholesky::new(&a, samples.len()).map_err(|e| GpError::NotPositiveDefinite { pivot: e.pivot })?;
    Ok(gls_slope(&f, samples.locations(), samples.values()))
}

/// Minimizes the negative log marginal likelihood over `(rho, tau)`.
///
/// With fewer than three samples the zero-mean default length scale is
/// returned. Collinear locations keep `rho = 0` and only search `tau`.
pub fn fit_hyperparams<T: Real>(samples: &SampleSet<T>, noise_var: T, search: &SearchConfig<T>) -> Hyperparams<T> {
    let fallback = Hyperparams::zero_mean(search.tau_default);
    if samples.len() < 3 {
        return fallback;
    }
    let locs = samples.locations();
    let ys = samples.values();
    let use_gls = !collinear(locs);
    let eval = |tau: T| profile(locs, ys, tau, noise_var, use_gls);

    let grid = search.grid();
    let scores: Vec<Option<Profile<T>>> = grid.iter().map(|&t| eval(t)).collect();
    let score = |k: usize| scores[k].as_ref().map(|p| p.nlml).unwrap_or(T::infinity());

    let mut best: Option<(T, Hyperparams<T>)> = None;
    let mut consider = |tau: T, p: &Profile<T>| {
        if best.as_ref().map(|(v, _)| p.nlml < *v).unwrap_or(true) {
            best = Some((p.nlml, Hyperparams::new(p.rho, tau)));
        }
    };
    for (k, p) in scores.iter().enumerate() {
        if let Some(p) = p {
            consider(grid[k], p);
        }
    }

    let n = grid.len();
    if n >= 2 {
        for k in 0..n {
            let v = score(k);
            if !v.is_finite() {
                continue;
            }
            let left_ok = k == 0 || v <= score(k - 1);
            let right_ok = k == n - 1 || v <= score(k + 1);
            if !(left_ok && right_ok) {
                continue;
            }
            let lo = grid[k.saturating_sub(1)].ln();
            let hi = grid[(k + 1).min(n - 1)].ln();
            if let Some((tau, p)) = golden_section(lo, hi, search.log_tol, |u| eval(u.exp())) {
                consider(tau, &p);
            }
        }
    }

    best.map(|(_, h)| h).unwrap_or(fallback)
}

fn golden_section<T: Real>(mut lo: T, mut hi: T, tol: T, eval: impl Fn(T) -> Option<Profile<T>>) -> Option<(T, Profile<T>)> {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let value = |p: &Option<Profile<T>>| p.as_ref().map(|p| p.nlml).unwrap_or(T::infinity());
    let mut c = hi - (hi - lo) * inv_phi;
    let mut d = lo + (hi - lo) * inv_phi;
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut iters = 0;
    while (hi - lo) > tol && iters < 200 {
        if value(&fc) <= value(&fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - (hi - lo) * inv_phi;
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + (hi - lo) * inv_phi;
            fd = eval(d);
        }
        iters += 1;
    }
    if value(&fc) <= value(&fd) {
        fc.map(|p| (c.exp(), p))
    } else {
        fd.map(|p| (d.exp(), p))
    }
}
