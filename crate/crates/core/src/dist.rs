//! Elementary distributions used by the estimators.
//!
//! The Weibull law is parameterized as `F(x) = 1 - exp(-x^alpha / theta)`, so
//! `theta` is a scale on the `x^alpha` axis rather than on `x` itself. Under
//! this parameterization two Weibulls with a common shape give
//! `P(X > Y) = theta1 / (theta1 + theta2)`.

use rand::Rng as _;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_positive, Result};
use crate::rng::Rng;

/// Hazard values of the standard extreme value law are capped here.
pub const HAZARD_CAP: f64 = 1e300;

/// Common-shape Weibull pair: `X ~ W(alpha, theta1)`, `Y ~ W(alpha, theta2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl WeibullParams {
    pub fn new(alpha: f64, theta1: f64, theta2: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("theta1", theta1)?;
        ensure_positive("theta2", theta2)?;
        Ok(Self { alpha, theta1, theta2 })
    }

    /// Stress-strength reliability implied by the two scales.
    pub fn reliability(&self) -> f64 {
        self.theta1 / (self.theta1 + self.theta2)
    }
}

/// Location/scale of `ln X` when `X ~ W(alpha, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeValueParams {
    pub mu: f64,
    pub sigma: f64,
}

impl ExtremeValueParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain(format!("mu must be finite, got {mu}")));
        }
        ensure_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn from_weibull(alpha: f64, theta: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("theta", theta)?;
        Self::new(theta.ln() / alpha, 1.0 / alpha)
    }

    /// Inverse of [`from_weibull`](Self::from_weibull): returns `(alpha, theta)`.
    pub fn to_weibull(&self) -> (f64, f64) {
        (1.0 / self.sigma, (self.mu / self.sigma).exp())
    }
}

fn check_shape_scale(alpha: f64, theta: f64) -> Result<()> {
    ensure_positive("alpha", alpha)?;
    ensure_positive("theta", theta)
}

pub fn weibull_pdf(x: f64, alpha: f64, theta: f64) -> Result<f64> {
    check_shape_scale(alpha, theta)?;
    if !(x >= 0.0) {
        return Err(domain(format!("x must be nonnegative, got {x}")));
    }
    if x == 0.0 {
        return Ok(if alpha < 1.0 {
            f64::INFINITY
        } else if alpha == 1.0 {
            1.0 / theta
        } else {
            0.0
        });
    }
    let xa = x.powf(alpha);
    Ok(alpha / theta * xa / x * (-xa / theta).exp())
}

pub fn weibull_cdf(x: f64, alpha: f64, theta: f64) -> Result<f64> {
    check_shape_scale(alpha, theta)?;
    if !(x >= 0.0) {
        return Err(domain(format!("x must be nonnegative, got {x}")));
    }
    Ok(-(-x.powf(alpha) / theta).exp_m1())
}

pub fn weibull_quantile(p: f64, alpha: f64, theta: f64) -> Result<f64> {
    check_shape_scale(alpha, theta)?;
    if !(0.0..1.0).contains(&p) {
        return Err(domain(format!("p must lie in [0, 1), got {p}")));
    }
    Ok((-theta * (-p).ln_1p()).powf(1.0 / alpha))
}

/// Draw `n` lifetimes by inverse transform.
pub fn weibull_sample(n: usize, alpha: f64, theta: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    check_shape_scale(alpha, theta)?;
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            (-theta * u.ln()).powf(1.0 / alpha)
        })
        .collect())
}

/// `P(X > Y)` for common-shape Weibulls with scales `theta1`, `theta2`.
pub fn stress_strength_r(theta1: f64, theta2: f64) -> Result<f64> {
    ensure_positive("theta1", theta1)?;
    ensure_positive("theta2", theta2)?;
    Ok(theta1 / (theta1 + theta2))
}

/// Hazard `g(z) / (1 - G(z)) = e^z` of the standard extreme value law,
/// together with a flag that is set when the value was capped at
/// [`HAZARD_CAP`].
pub fn ev_hazard_checked(z: f64) -> (f64, bool) {
    if z >= HAZARD_CAP.ln() {
        (HAZARD_CAP, true)
    } else {
        (z.exp(), false)
    }
}

/// Hazard of the standard extreme value law, saturating at [`HAZARD_CAP`].
pub fn ev_hazard(z: f64) -> f64 {
    ev_hazard_checked(z).0
}

/// Score `g'(z) / g(z) = 1 - e^z`; saturates along with the hazard.
pub fn ev_score(z: f64) -> f64 {
    1.0 - ev_hazard(z)
}

pub fn ev_cdf(z: f64) -> f64 {
    -(-z.exp()).exp_m1()
}

/// Gamma draw with the given shape and rate.
///
/// Marsaglia-Tsang squeeze for `shape >= 1`; smaller shapes are boosted to
/// `shape + 1` and scaled by `U^(1/shape)`.
pub fn gamma_sample(shape: f64, rate: f64, rng: &mut Rng) -> Result<f64> {
    ensure_positive("gamma shape", shape)?;
    ensure_positive("gamma rate", rate)?;
    Ok(standard_gamma(shape, rng) / rate)
}

fn standard_gamma(shape: f64, rng: &mut Rng) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        return standard_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x: f64 = rng.sample(StandardNormal);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Inverse-gamma draw: the reciprocal of a `Gamma(a, rate = b)` variate.
pub fn inverse_gamma_sample(a: f64, b: f64, rng: &mut Rng) -> Result<f64> {
    ensure_positive("inverse gamma shape", a)?;
    ensure_positive("inverse gamma scale", b)?;
    Ok(b / standard_gamma(a, rng))
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Newton step against the erfc-based CDF.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    #[allow(clippy::excessive_precision)]
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - P_LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Work on the lower tail so the residual is not swamped by 1 - p rounding.
    let (x, target, sign) = if x > 0.0 { (-x, 1.0 - p, -1.0) } else { (x, p, 1.0) };
    let refined = x - (std_normal_cdf(x) - target) / std_normal_pdf(x);
    Ok(sign * refined)
}
