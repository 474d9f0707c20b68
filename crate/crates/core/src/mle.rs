//! Maximum likelihood for the common-shape Weibull pair under hybrid
//! censoring.
//!
//! With `d` observed failures, censoring point `u` and `n - d` survivors, the
//! log-likelihood is
//!
//! ```text
//! l = (d1 + d2) ln a - d1 ln t1 - d2 ln t2 + (a - 1) W - S1(a)/t1 - S2(a)/t2
//! S(a) = sum x_i^a + (n - d) u^a,     W = sum ln x_i + sum ln y_j
//! ```
//!
//! For fixed shape the scales have closed forms `S1(a)/d1`, `S2(a)/d2`. The
//! shape solves the one-dimensional equation `k(a) = a`, attacked first by
//! plain fixed-point iteration and, if that misbehaves, by Brent's method on
//! the profiled score.

use serde::{Deserialize, Serialize};

use crate::censoring::{HybridSample, PairedData};
use crate::dist::WeibullParams;
use crate::error::{domain, ensure_positive, Error, Result};
use crate::numeric::{brent, CompensatedSum};

/// Power sums of one sample at shape `alpha`, stored relative to
/// `exp(log_scale)` so large shapes do not overflow.
///
/// `s0 = S / e^M`, `s1 = S' / e^M`, `s2 = S'' / e^M` where the derivatives
/// are with respect to `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSums {
    pub log_scale: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl PowerSums {
    pub fn new(sample: &HybridSample, alpha: f64) -> Self {
        let ln_u = sample.u().ln();
        let log_scale = alpha * ln_u;
        let (mut s0, mut s1, mut s2) = (
            CompensatedSum::default(),
            CompensatedSum::default(),
            CompensatedSum::default(),
        );
        for &x in sample.times() {
            let lx = x.ln();
            let w = (alpha * lx - log_scale).exp();
            s0.add(w);
            s1.add(w * lx);
            s2.add(w * lx * lx);
        }
        let c = sample.survivors() as f64;
        if c > 0.0 {
            s0.add(c);
            s1.add(c * ln_u);
            s2.add(c * ln_u * ln_u);
        }
        Self {
            log_scale,
            s0: s0.value(),
            s1: s1.value(),
            s2: s2.value(),
        }
    }

    pub fn s(&self) -> f64 {
        self.log_scale.exp() * self.s0
    }

    pub fn s_prime(&self) -> f64 {
        self.log_scale.exp() * self.s1
    }

    pub fn s_second(&self) -> f64 {
        self.log_scale.exp() * self.s2
    }

    /// `S'/S`, the weighted mean log-lifetime; overflow-free.
    pub fn log_mean(&self) -> f64 {
        self.s1 / self.s0
    }
}

/// The sums entering the likelihood at a given shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub alpha: f64,
    pub s1: f64,
    pub s1_prime: f64,
    pub s2: f64,
    pub s2_prime: f64,
    pub w: f64,
}

impl ProfileStats {
    pub fn at(alpha: f64, data: &PairedData) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        let px = PowerSums::new(&data.x, alpha);
        let py = PowerSums::new(&data.y, alpha);
        Ok(Self {
            alpha,
            s1: px.s(),
            s1_prime: px.s_prime(),
            s2: py.s(),
            s2_prime: py.s_prime(),
            w: log_sum(data),
        })
    }
}

/// `W`: sum of the log observed failure times over both samples.
pub fn log_sum(data: &PairedData) -> f64 {
    let mut acc = CompensatedSum::default();
    for t in data.x.times().iter().chain(data.y.times()) {
        acc.add(t.ln());
    }
    acc.value()
}

pub fn log_likelihood(params: &WeibullParams, data: &PairedData) -> Result<f64> {
    let WeibullParams { alpha, theta1, theta2 } = WeibullParams::new(params.alpha, params.theta1, params.theta2)?;
    let (d1, d2) = (data.x.d() as f64, data.y.d() as f64);
    let stats = ProfileStats::at(alpha, data)?;
    Ok(
        (d1 + d2) * alpha.ln() - d1 * theta1.ln() - d2 * theta2.ln() + (alpha - 1.0) * stats.w
            - stats.s1 / theta1
            - stats.s2 / theta2,
    )
}

/// Gradient of the log-likelihood in `(alpha, theta1, theta2)`.
pub fn score(params: &WeibullParams, data: &PairedData) -> Result<[f64; 3]> {
    let p = WeibullParams::new(params.alpha, params.theta1, params.theta2)?;
    let (d1, d2) = (data.x.d() as f64, data.y.d() as f64);
    let s = ProfileStats::at(p.alpha, data)?;
    Ok([
        (d1 + d2) / p.alpha + s.w - s.s1_prime / p.theta1 - s.s2_prime / p.theta2,
        -d1 / p.theta1 + s.s1 / (p.theta1 * p.theta1),
        -d2 / p.theta2 + s.s2 / (p.theta2 * p.theta2),
    ])
}

/// Scale estimates for a fixed shape: `S1(alpha)/d1`, `S2(alpha)/d2`.
pub fn profile_scales(alpha: f64, data: &PairedData) -> Result<(f64, f64)> {
    let s = ProfileStats::at(alpha, data)?;
    Ok((s.s1 / data.x.d() as f64, s.s2 / data.y.d() as f64))
}

/// Score in `alpha` after profiling out the scales.
pub fn profile_score(alpha: f64, data: &PairedData) -> f64 {
    let (d1, d2) = (data.x.d() as f64, data.y.d() as f64);
    let px = PowerSums::new(&data.x, alpha);
    let py = PowerSums::new(&data.y, alpha);
    (d1 + d2) / alpha + log_sum(data) - d1 * px.log_mean() - d2 * py.log_mean()
}

/// The fixed-point map `k(alpha) = (d1 + d2) / (U + V - W)`.
pub fn fixed_point_map(alpha: f64, data: &PairedData) -> f64 {
    let (d1, d2) = (data.x.d() as f64, data.y.d() as f64);
    let u = d1 * PowerSums::new(&data.x, alpha).log_mean();
    let v = d2 * PowerSums::new(&data.y, alpha).log_mean();
    (d1 + d2) / (u + v - log_sum(data))
}

/// Profile log-likelihood in the shape alone.
pub fn profile_log_likelihood(alpha: f64, data: &PairedData) -> Result<f64> {
    let (t1, t2) = profile_scales(alpha, data)?;
    log_likelihood(&WeibullParams::new(alpha, t1, t2)?, data)
}

/// Explicit estimate of `R` when the shape is known.
pub fn known_alpha_mle(alpha: f64, data: &PairedData) -> Result<f64> {
    let s = ProfileStats::at(alpha, data)?;
    let ratio = data.x.d() as f64 / data.y.d() as f64;
    Ok(s.s1 / (s.s1 + ratio * s.s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitStrategy {
    Fixed(f64),
    /// Common slope of the Weibull probability plots of both samples.
    WeibullPlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub init: InitStrategy,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            init: InitStrategy::Fixed(1.0),
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    FixedPoint,
    Bracketed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub r: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: SolveMethod,
}

impl MleFit {
    pub fn params(&self) -> WeibullParams {
        WeibullParams {
            alpha: self.alpha,
            theta1: self.theta1,
            theta2: self.theta2,
        }
    }
}

/// Slope of `ln(-ln(1 - p_i))` on `ln x_i` with plotting positions
/// `p_i = i/(n+1)`, pooled over both samples with separate intercepts.
pub fn weibull_plot_slope(data: &PairedData) -> Option<f64> {
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for s in [&data.x, &data.y] {
        let n = s.n() as f64;
        let pts: Vec<(f64, f64)> = s
            .times()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let p = (i + 1) as f64 / (n + 1.0);
                (x.ln(), (-(-p).ln_1p()).ln())
            })
            .collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        for (x, y) in pts {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    let slope = sxy / sxx;
    (slope.is_finite() && slope > 0.0).then_some(slope)
}

fn check_identifiable(data: &PairedData) -> Result<()> {
    if data.total_failures() < 2 {
        return Err(Error::DegenerateData(format!(
            "{} observed failures; need at least 2",
            data.total_failures()
        )));
    }
    // As alpha grows, U + V - W tends to sum_k d_k ln u_k - W, which is zero
    // only if every observation sits at its own censoring point.
    let flat = |s: &HybridSample| s.times().iter().all(|&t| t == s.u());
    if flat(&data.x) && flat(&data.y) {
        return Err(Error::DegenerateData(
            "every observation equals its censoring point; the shape is not identifiable".into(),
        ));
    }
    Ok(())
}

fn finish(alpha: f64, data: &PairedData, iterations: usize, method: SolveMethod) -> Result<MleFit> {
    let (theta1, theta2) = profile_scales(alpha, data)?;
    if !(theta1.is_finite() && theta2.is_finite() && theta1 > 0.0 && theta2 > 0.0) {
        return Err(Error::NonConvergence { iterations });
    }
    Ok(MleFit {
        alpha,
        theta1,
        theta2,
        r: theta1 / (theta1 + theta2),
        iterations,
        converged: true,
        method,
    })
}

fn initial_alpha(data: &PairedData, init: InitStrategy) -> Result<f64> {
    let a = match init {
        InitStrategy::Fixed(a) => a,
        InitStrategy::WeibullPlot => weibull_plot_slope(data).unwrap_or(1.0),
    };
    ensure_positive("initial alpha", a)?;
    Ok(a)
}

/// Iterate `alpha <- k(alpha)` until successive iterates differ by at most
/// `tol`. Falls back to [`solve_alpha_bracketed`] if the step sizes stop
/// shrinking over a 10-step window, an iterate leaves `(0, inf)`, or
/// `max_iter` is exhausted.
pub fn solve_alpha_fixed_point(data: &PairedData, opts: &MleOptions) -> Result<MleFit> {
    check_identifiable(data)?;
    if !(opts.tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let mut alpha = initial_alpha(data, opts.init)?;
    let mut steps: Vec<f64> = Vec::with_capacity(opts.max_iter);
    for iter in 1..=opts.max_iter {
        let next = fixed_point_map(alpha, data);
        if !(next.is_finite() && next > 0.0) {
            break;
        }
        let step = (next - alpha).abs();
        alpha = next;
        if step <= opts.tol {
            return finish(alpha, data, iter, SolveMethod::FixedPoint);
        }
        steps.push(step);
        if steps.len() >= 10 && steps[steps.len() - 10..].windows(2).any(|w| w[1] > w[0]) {
            break;
        }
    }
    solve_alpha_bracketed(data, opts).map(|mut fit| {
        fit.iterations += steps.len();
        fit
    })
}

/// Brent's method on the profiled score, which is strictly decreasing in
/// `alpha`.
pub fn solve_alpha_bracketed(data: &PairedData, opts: &MleOptions) -> Result<MleFit> {
    check_identifiable(data)?;
    let start = initial_alpha(data, opts.init)?;
    let g = |a: f64| profile_score(a, data);
    let (mut lo, mut hi) = (start, start);
    let mut expansions = 0;
    while g(lo) <= 0.0 {
        lo *= 0.5;
        expansions += 1;
        if lo < 1e-12 || expansions > 200 {
            return Err(Error::NonConvergence { iterations: expansions });
        }
    }
    while g(hi) >= 0.0 {
        hi *= 2.0;
        expansions += 1;
        if hi > 1e8 || expansions > 200 {
            return Err(Error::NonConvergence { iterations: expansions });
        }
    }
    let xtol = (opts.tol * 1e-2).max(1e-15) * start.max(1.0);
    let (alpha, evals) = brent(g, lo, hi, xtol, opts.max_iter.max(100)).ok_or(Error::NonConvergence {
        iterations: opts.max_iter,
    })?;
    finish(alpha, data, expansions + evals, SolveMethod::Bracketed)
}

/// MLE with default options.
pub fn fit_mle(data: &PairedData) -> Result<MleFit> {
    solve_alpha_fixed_point(data, &MleOptions::default())
}
