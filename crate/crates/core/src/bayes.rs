//! Bayesian estimation of `R` with independent inverse-gamma priors on the
//! scales and a gamma prior on the shape.
//!
//! Given the shape, each scale has an inverse-gamma full conditional
//! `IG(d + a, b + S(alpha))` and is drawn exactly. The shape's conditional
//! has no standard form and is updated by a random-walk Metropolis step.

use std::io::Write;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::censoring::PairedData;
use crate::dist::{inverse_gamma_sample, WeibullParams};
use crate::error::{domain, Error, Result};
use crate::intervals::{percentile_endpoints, percentile_ranks, Interval, Method};
use crate::mle::{fit_mle, log_sum, PowerSums};
use crate::numeric::CompensatedSum;
use crate::rng::{rng_from_seed, Rng};

/// Hyperparameters: `theta1 ~ IG(a1, b1)`, `theta2 ~ IG(a2, b2)`,
/// `alpha ~ Gamma(a3, b3)`. Zero pairs give the improper limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub a3: f64,
    pub b3: f64,
}

impl PriorSpec {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64, a3: f64, b3: f64) -> Result<Self> {
        let p = Self { a1, b1, a2, b2, a3, b3 };
        if p.as_array().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain(format!("hyperparameters must be finite and nonnegative: {p:?}")));
        }
        Ok(p)
    }

    /// Non-informative: every hyperparameter zero.
    pub fn prior1() -> Self {
        Self {
            a1: 0.0,
            b1: 0.0,
            a2: 0.0,
            b2: 0.0,
            a3: 0.0,
            b3: 0.0,
        }
    }

    /// Informative: `a = 1`, `b = 2` for all three parameters.
    pub fn prior2() -> Self {
        Self {
            a1: 1.0,
            b1: 2.0,
            a2: 1.0,
            b2: 2.0,
            a3: 1.0,
            b3: 2.0,
        }
    }

    /// Exchange the hyperparameters of the two scales.
    pub fn swapped(&self) -> Self {
        Self {
            a1: self.a2,
            b1: self.b2,
            a2: self.a1,
            b2: self.b1,
            ..*self
        }
    }

    fn as_array(&self) -> [f64; 6] {
        [self.a1, self.b1, self.a2, self.b2, self.a3, self.b3]
    }
}

/// Fails unless both samples have a failure and the shape conditional is
/// integrable at zero.
pub fn check_proper(prior: &PriorSpec, data: &PairedData) -> Result<()> {
    let (d1, d2) = (data.x.d(), data.y.d());
    if d1 == 0 || d2 == 0 {
        return Err(Error::ImproperPosterior(format!(
            "need a failure in each sample, got d1={d1}, d2={d2}"
        )));
    }
    if !(prior.a3 + (d1 + d2) as f64 > 1.0) {
        return Err(Error::ImproperPosterior("a3 + d1 + d2 must exceed 1".into()));
    }
    Ok(())
}

/// Log of the shape's full conditional, up to an additive constant:
/// `(d1 + d2 + a3 - 1) ln a + a W - b3 a - S1(a)/theta1 - S2(a)/theta2`.
pub fn log_conditional_alpha(
    alpha: f64,
    theta1: f64,
    theta2: f64,
    prior: &PriorSpec,
    data: &PairedData,
) -> Result<f64> {
    WeibullParams::new(alpha, theta1, theta2)?;
    Ok(log_conditional(alpha, theta1, theta2, prior, data, log_sum(data)))
}

fn log_conditional(alpha: f64, theta1: f64, theta2: f64, prior: &PriorSpec, data: &PairedData, w: f64) -> f64 {
    let k = data.total_failures() as f64;
    let s1 = PowerSums::new(&data.x, alpha).s();
    let s2 = PowerSums::new(&data.y, alpha).s();
    (k + prior.a3 - 1.0) * alpha.ln() + alpha * w - prior.b3 * alpha - s1 / theta1 - s2 / theta2
}

/// One random-walk Metropolis update of the shape. A zero proposal spread
/// freezes the shape.
pub fn mh_step_alpha(
    current: f64,
    proposal_sd: f64,
    theta1: f64,
    theta2: f64,
    prior: &PriorSpec,
    data: &PairedData,
    rng: &mut Rng,
) -> Result<(f64, bool)> {
    if !(current.is_finite() && current > 0.0) {
        return Err(domain(format!("current shape must be positive, got {current}")));
    }
    if !(proposal_sd.is_finite() && proposal_sd >= 0.0) {
        return Err(domain(format!("proposal sd must be nonnegative, got {proposal_sd}")));
    }
    let w = log_sum(data);
    Ok(mh_step(current, proposal_sd, theta1, theta2, prior, data, w, rng))
}

#[allow(clippy::too_many_arguments)]
fn mh_step(
    x: f64,
    sd: f64,
    t1: f64,
    t2: f64,
    prior: &PriorSpec,
    data: &PairedData,
    w: f64,
    rng: &mut Rng,
) -> (f64, bool) {
    if sd == 0.0 {
        return (x, false);
    }
    let z: f64 = rng.sample(StandardNormal);
    let u: f64 = rng.random();
    let y = x + sd * z;
    if y <= 0.0 {
        return (x, false);
    }
    let log_ratio = log_conditional(y, t1, t2, prior, data, w) - log_conditional(x, t1, t2, prior, data, w);
    if u.ln() < log_ratio {
        (y, true)
    } else {
        (x, false)
    }
}

/// Which shape value the scale draws condition on within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanOrder {
    /// Scales are drawn at the shape from the previous sweep.
    Printed,
    /// Scales are drawn at the freshly updated shape.
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsOptions {
    /// Stored draws.
    pub m: usize,
    pub burn_in: usize,
    pub proposal_sd: f64,
    /// Starting point; `None` starts at the MLE.
    pub init: Option<WeibullParams>,
    pub seed: u64,
    pub scan: ScanOrder,
}

impl GibbsOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            m: 10_000,
            burn_in: 1_000,
            proposal_sd: 1.0,
            init: None,
            seed,
            scan: ScanOrder::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub draws: Vec<Draw>,
    pub burn_in: usize,
    /// Fraction of accepted shape proposals over all sweeps, burn-in included.
    pub acceptance_rate: f64,
    pub seed: u64,
}

impl PosteriorDraws {
    pub fn r_values(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.r).collect()
    }

    /// Write `sweep,alpha,theta1,theta2,r`, one row per stored draw. Sweeps
    /// are numbered from 1 after burn-in.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sweep", "alpha", "theta1", "theta2", "r"])?;
        for (i, d) in self.draws.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                d.alpha.to_string(),
                d.theta1.to_string(),
                d.theta2.to_string(),
                d.r.to_string(),
            ])?;
        }
        w.flush()
    }
}

pub fn gibbs_chain(data: &PairedData, prior: &PriorSpec, opts: &GibbsOptions) -> Result<PosteriorDraws> {
    check_proper(prior, data)?;
    if opts.m == 0 {
        return Err(domain("chain length must be at least 1"));
    }
    if !(opts.proposal_sd.is_finite() && opts.proposal_sd >= 0.0) {
        return Err(domain(format!(
            "proposal sd must be nonnegative, got {}",
            opts.proposal_sd
        )));
    }
    let start = match opts.init {
        Some(p) => WeibullParams::new(p.alpha, p.theta1, p.theta2)?,
        None => fit_mle(data)?.params(),
    };
    let w = log_sum(data);
    let (d1, d2) = (data.x.d() as f64, data.y.d() as f64);
    let mut rng = rng_from_seed(opts.seed);
    let (mut alpha, mut t1, mut t2) = (start.alpha, start.theta1, start.theta2);
    let total = opts.burn_in + opts.m;
    let mut accepted = 0usize;
    let mut draws = Vec::with_capacity(opts.m);
    for sweep in 0..total {
        let previous = alpha;
        let (next, acc) = mh_step(alpha, opts.proposal_sd, t1, t2, prior, data, w, &mut rng);
        alpha = next;
        accepted += acc as usize;
        let at = match opts.scan {
            ScanOrder::Printed => previous,
            ScanOrder::Systematic => alpha,
        };
        let s1 = PowerSums::new(&data.x, at).s();
        let s2 = PowerSums::new(&data.y, at).s();
        t1 = inverse_gamma_sample(d1 + prior.a1, prior.b1 + s1, &mut rng)?;
        t2 = inverse_gamma_sample(d2 + prior.a2, prior.b2 + s2, &mut rng)?;
        if sweep >= opts.burn_in {
            draws.push(Draw {
                alpha,
                theta1: t1,
                theta2: t2,
                r: t1 / (t1 + t2),
            });
        }
    }
    Ok(PosteriorDraws {
        draws,
        burn_in: opts.burn_in,
        acceptance_rate: accepted as f64 / total as f64,
        seed: opts.seed,
    })
}

/// Posterior mean and the `1/M` variance of the stored values.
pub fn posterior_summary(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyChain);
    }
    let m = values.len() as f64;
    let mut sum = CompensatedSum::default();
    values.iter().for_each(|v| sum.add(*v));
    let mean = sum.value() / m;
    let mut ss = CompensatedSum::default();
    values.iter().for_each(|v| ss.add((v - mean) * (v - mean)));
    Ok((mean, ss.value() / m))
}

fn check_draws(len: usize, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if len == 0 {
        return Err(Error::EmptyChain);
    }
    if (len as f64 * gamma / 2.0) < 1.0 {
        return Err(Error::InsufficientDraws { draws: len, gamma });
    }
    Ok(())
}

/// Percentile credible interval from the sorted draws, at 1-based ranks
/// `floor(gamma M / 2)` and `floor((1 - gamma/2) M)`.
pub fn credible_interval(values: &[f64], gamma: f64) -> Result<Interval> {
    check_draws(values.len(), gamma)?;
    let (lo, hi) = percentile_endpoints(values, gamma)?;
    Interval::for_probability(lo, hi, 1.0 - gamma, Method::Credible)
}

/// Shortest interval spanning the same number of order statistics as the
/// percentile interval.
pub fn hpd_interval(values: &[f64], gamma: f64) -> Result<Interval> {
    check_draws(values.len(), gamma)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_ranks(sorted.len(), gamma);
    let span = hi - lo;
    let (mut best, mut width) = (0, f64::INFINITY);
    for j in 0..sorted.len() - span {
        let w = sorted[j + span] - sorted[j];
        if w < width {
            best = j;
            width = w;
        }
    }
    Interval::for_probability(sorted[best], sorted[best + span], 1.0 - gamma, Method::Hpd)
}
