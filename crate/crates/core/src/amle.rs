//! Approximate maximum likelihood via the extreme value representation.
//!
//! Taking logs turns each Weibull sample into an extreme value sample with
//! location `mu_k = ln(theta_k) / alpha` and common scale `sigma = 1/alpha`.
//! The nonlinear terms of its likelihood equations, the score
//! `g'(z)/g(z) = 1 - e^z` at each failure and the hazard `e^z` at the
//! censoring point, are replaced by tangent lines at the expected quantiles
//! `ln(-ln q_i)`. The equations then become linear in `mu` and quadratic in
//! `sigma` and solve in closed form.
//!
//! Each failure `i` of a sample of size `n` is expanded at `q_i = 1 - i/(n+1)`.
//! The censoring point is expanded at `q_d` when the test stopped at the
//! `d`-th failure, and at the midpoint `1 - (p_d + p_{d+1})/2` when it
//! stopped at the time limit.

use serde::{Deserialize, Serialize};

use crate::censoring::{CensoringCase, HybridSample, PairedData};
use crate::error::{Error, Result};

/// Tangent-line coefficients `alpha_i + beta_i z` for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoeffs {
    /// Intercepts for the observed failures `i = 1..=d`.
    pub alpha: Vec<f64>,
    /// Slopes `ln q_i` for the observed failures.
    pub beta: Vec<f64>,
    /// Expansion points `ln(-ln q_i)`.
    pub mu: Vec<f64>,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub mu_c: f64,
}

fn coeffs_at(q: f64) -> (f64, f64, f64) {
    let beta = q.ln();
    let mu = (-beta).ln();
    (1.0 + beta * (1.0 - mu), beta, mu)
}

/// Expansion coefficients for a sample of size `sample_size` with `d`
/// observed failures.
pub fn taylor_coeffs(sample_size: usize, d: usize, case: CensoringCase) -> Result<TaylorCoeffs> {
    if d == 0 || d > sample_size {
        return Err(crate::error::domain(format!(
            "need 1 <= d <= n, got d={d}, n={sample_size}"
        )));
    }
    let np1 = (sample_size + 1) as f64;
    let p = |i: usize| i as f64 / np1;
    let (mut alpha, mut beta, mut mu) = (Vec::with_capacity(d), Vec::with_capacity(d), Vec::with_capacity(d));
    for i in 1..=d {
        let (a, b, m) = coeffs_at(1.0 - p(i));
        alpha.push(a);
        beta.push(b);
        mu.push(m);
    }
    let q_c = match case {
        CensoringCase::CaseII if d < sample_size => 1.0 - 0.5 * (p(d) + p(d + 1)),
        _ => 1.0 - p(d),
    };
    let (alpha_c, beta_c, mu_c) = coeffs_at(q_c);
    Ok(TaylorCoeffs {
        alpha,
        beta,
        mu,
        alpha_c,
        beta_c,
        mu_c,
    })
}

/// Per-sample pieces of the closed-form solution: `mu = a + b sigma`, plus
/// this sample's contributions to the quadratic coefficients `D` and `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleTerms {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
}

impl SampleTerms {
    pub fn new(sample: &HybridSample) -> Result<Self> {
        let c = taylor_coeffs(sample.n(), sample.d(), sample.case())?;
        let k = sample.survivors() as f64;
        let t: Vec<f64> = sample.times().iter().map(|x| x.ln()).collect();
        let tc = sample.u().ln();

        let sum_beta: f64 = c.beta.iter().sum();
        let sum_alpha: f64 = c.alpha.iter().sum();
        let den = sum_beta + k * c.beta_c;
        let a = (c.beta.iter().zip(&t).map(|(b, t)| b * t).sum::<f64>() + k * c.beta_c * tc) / den;
        let b = (sum_alpha - k * (1.0 - c.alpha_c)) / den;
        let d = c.alpha.iter().zip(&t).map(|(al, t)| al * (t - 3.0 * a)).sum::<f64>()
            - k * (1.0 - c.alpha_c) * (tc - 3.0 * a)
            + 2.0 * a * b * sum_beta
            + 2.0 * a * b * k * c.beta_c;
        let e = c.beta.iter().zip(&t).map(|(be, t)| be * t * (t - a)).sum::<f64>() + k * c.beta_c * tc * tc
            - k * a * c.beta_c * tc;
        Ok(Self { a, b, d, e })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmleFit {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub r: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub d: f64,
    pub e: f64,
}

impl AmleFit {
    pub fn params(&self) -> crate::dist::WeibullParams {
        crate::dist::WeibullParams {
            alpha: self.alpha,
            theta1: self.theta1,
            theta2: self.theta2,
        }
    }
}

/// Closed-form approximate MLE. Each sample uses the censoring-point
/// expansion that matches its own case, so all four case combinations go
/// through this one routine.
pub fn amle_fit(data: &PairedData) -> Result<AmleFit> {
    if data.total_failures() < 2 {
        return Err(Error::DegenerateData("need at least 2 observed failures".into()));
    }
    let x = SampleTerms::new(&data.x)?;
    let y = SampleTerms::new(&data.y)?;
    let k = data.total_failures() as f64;
    let d = x.d + y.d;
    let e = x.e + y.e;
    let disc = d * d - 4.0 * k * e;
    if !(disc >= 0.0) {
        return Err(Error::NegativeDiscriminant(disc));
    }
    let sigma = (-d + disc.sqrt()) / (2.0 * k);
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::NonpositiveSigma(sigma));
    }
    let mu1 = x.a + x.b * sigma;
    let mu2 = y.a + y.b * sigma;
    let theta1 = (mu1 / sigma).exp();
    let theta2 = (mu2 / sigma).exp();
    // Ratio via the log-scale difference so huge thetas cannot overflow.
    let r = 1.0 / (1.0 + ((mu2 - mu1) / sigma).exp());
    Ok(AmleFit {
        mu1,
        mu2,
        sigma,
        alpha: 1.0 / sigma,
        theta1,
        theta2,
        r,
        a1: x.a,
        b1: x.b,
        a2: y.a,
        b2: y.b,
        d,
        e,
    })
}

/// Same as [`amle_fit`]; kept as a separate entry point for callers that want
/// to be explicit about mixing a case I sample with a case II sample.
pub fn amle_mixed_cases(data: &PairedData) -> Result<AmleFit> {
    amle_fit(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::{apply_scheme, generate_hybrid_sample, HybridScheme};
    use crate::datasets;
    use crate::dist::ev_score;
    use crate::mle::fit_mle;
    use crate::rng::rng_from_seed;

    fn scheme(x: (usize, f64), y: (usize, f64)) -> PairedData {
        PairedData::new(
            apply_scheme(&datasets::strength_shifted(), &HybridScheme::new(69, x.0, x.1).unwrap()).unwrap(),
            apply_scheme(&datasets::stress_shifted(), &HybridScheme::new(63, y.0, y.1).unwrap()).unwrap(),
        )
    }

    #[test]
    fn coefficient_examples() {
        let (a, b, _) = coeffs_at((-1.0f64).exp());
        assert!((b + 1.0).abs() < 1e-15);
        assert!(a.abs() < 1e-15);
        let c = taylor_coeffs(30, 20, CensoringCase::CaseI).unwrap();
        assert!((c.beta[14] - (16.0f64 / 31.0).ln()).abs() < 1e-15);
        assert!(c.beta.iter().all(|b| *b < 0.0));
        assert!(taylor_coeffs(5, 0, CensoringCase::CaseI).is_err());
    }

    #[test]
    fn tangency() {
        for n in [5usize, 30, 100] {
            for d in 1..=n {
                for case in [CensoringCase::CaseI, CensoringCase::CaseII] {
                    let c = taylor_coeffs(n, d, case).unwrap();
                    for i in 0..d {
                        let lin = c.alpha[i] + c.beta[i] * c.mu[i];
                        assert!((lin - ev_score(c.mu[i])).abs() < 1e-12);
                    }
                    let hazard = 1.0 - c.alpha_c - c.beta_c * c.mu_c;
                    assert!((hazard - c.mu_c.exp()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn case_ii_censor_point_is_midpoint() {
        let c = taylor_coeffs(10, 4, CensoringCase::CaseII).unwrap();
        let q: f64 = 1.0 - (4.0 / 11.0 + 5.0 / 11.0) / 2.0;
        assert!((c.beta_c - q.ln()).abs() < 1e-15);
        // complete data falls back to the last order statistic
        let full = taylor_coeffs(10, 10, CensoringCase::CaseII).unwrap();
        assert_eq!(full.beta_c, full.beta[9]);
    }

    #[test]
    fn symmetric_data_gives_one_half() {
        let data = scheme((45, 2.5), (45, 2.5));
        let same = PairedData::new(data.x.clone(), data.x.clone());
        let fit = amle_fit(&same).unwrap();
        assert!((fit.r - 0.5).abs() < 1e-15);
        assert_eq!(fit.a1, fit.a2);
    }

    #[test]
    fn closed_form_relations() {
        let data = scheme((35, 1.7), (25, 2.2));
        let fit = amle_fit(&data).unwrap();
        let k = data.total_failures() as f64;
        let sigma = (-fit.d + (fit.d * fit.d - 4.0 * k * fit.e).sqrt()) / (2.0 * k);
        assert_eq!(fit.sigma, sigma);
        assert!((fit.theta1 - (fit.mu1 / fit.sigma).exp()).abs() < 1e-12 * fit.theta1);
        assert!((fit.r - fit.theta1 / (fit.theta1 + fit.theta2)).abs() < 1e-14);
        assert!(fit.e < 0.0);
    }

    #[test]
    fn d_and_e_are_additive() {
        let data = scheme((35, 1.7), (40, 2.5));
        let fit = amle_fit(&data).unwrap();
        let x = SampleTerms::new(&data.x).unwrap();
        let y = SampleTerms::new(&data.y).unwrap();
        assert_eq!(fit.d, x.d + y.d);
        assert_eq!(fit.e, x.e + y.e);
    }

    #[test]
    fn dispatch_identity_and_label_symmetry() {
        let data = scheme((45, 2.5), (40, 2.5));
        assert_eq!(amle_fit(&data).unwrap(), amle_mixed_cases(&data).unwrap());

        let mixed = scheme((35, 1.7), (40, 2.5));
        assert_eq!(mixed.x.case(), CensoringCase::CaseII);
        assert_eq!(mixed.y.case(), CensoringCase::CaseI);
        let r = amle_mixed_cases(&mixed).unwrap().r;
        let swapped = amle_mixed_cases(&mixed.swapped()).unwrap().r;
        assert!((r + swapped - 1.0).abs() < 1e-12);
    }

    // Literal transcription of the time-censored formulas for both samples.
    #[test]
    fn case_ii_pair_matches_hand_evaluation() {
        let xs = [0.3, 0.7, 1.1];
        let ys = [0.5, 0.9, 1.4];
        let (n, m, t1, t2) = (6usize, 7usize, 1.2f64, 1.5f64);
        let x = HybridSample::from_observed(HybridScheme::new(n, 5, t1).unwrap(), xs.to_vec()).unwrap();
        let y = HybridSample::from_observed(HybridScheme::new(m, 4, t2).unwrap(), ys.to_vec()).unwrap();
        assert_eq!((x.case(), y.case()), (CensoringCase::CaseII, CensoringCase::CaseII));
        let fit = amle_fit(&PairedData::new(x, y)).unwrap();

        let q = |i: f64, size: usize| 1.0 - i / (size as f64 + 1.0);
        let al = |q: f64| 1.0 + q.ln() * (1.0 - (-q.ln()).ln());
        let be = |q: f64| q.ln();
        let (r1, r2) = (3usize, 3usize);
        let q1s = 1.0 - (3.0 / 7.0 + 4.0 / 7.0) / 2.0;
        let q2s = 1.0 - (3.0 / 8.0 + 4.0 / 8.0) / 2.0;
        let t: Vec<f64> = xs.iter().map(|v: &f64| v.ln()).collect();
        let s: Vec<f64> = ys.iter().map(|v: &f64| v.ln()).collect();
        let (lt1, lt2) = (t1.ln(), t2.ln());
        let (cn, cm) = ((n - r1) as f64, (m - r2) as f64);

        let sb1: f64 = (1..=r1).map(|i| be(q(i as f64, n))).sum();
        let sa1: f64 = (1..=r1).map(|i| al(q(i as f64, n))).sum();
        let sbt1: f64 = (1..=r1).map(|i| be(q(i as f64, n)) * t[i - 1]).sum();
        let a1 = (sbt1 + cn * be(q1s) * lt1) / (sb1 + cn * be(q1s));
        let b1 = (sa1 - cn * (1.0 - al(q1s))) / (sb1 + cn * be(q1s));

        let sb2: f64 = (1..=r2).map(|j| be(q(j as f64, m))).sum();
        let sa2: f64 = (1..=r2).map(|j| al(q(j as f64, m))).sum();
        let sbs2: f64 = (1..=r2).map(|j| be(q(j as f64, m)) * s[j - 1]).sum();
        let a2 = (sbs2 + cm * be(q2s) * lt2) / (sb2 + cm * be(q2s));
        let b2 = (sa2 - cm * (1.0 - al(q2s))) / (sb2 + cm * be(q2s));

        let d = (1..=r1)
            .map(|i| al(q(i as f64, n)) * (t[i - 1] - 3.0 * a1))
            .sum::<f64>()
            - cn * (1.0 - al(q1s)) * (lt1 - 3.0 * a1)
            + 2.0 * a1 * b1 * sb1
            + 2.0 * a1 * b1 * cn * be(q1s)
            + (1..=r2)
                .map(|j| al(q(j as f64, m)) * (s[j - 1] - 3.0 * a2))
                .sum::<f64>()
            - cm * (1.0 - al(q2s)) * (lt2 - 3.0 * a2)
            + 2.0 * a2 * b2 * sb2
            + 2.0 * a2 * b2 * cm * be(q2s);
        let e = (1..=r1)
            .map(|i| be(q(i as f64, n)) * t[i - 1] * (t[i - 1] - a1))
            .sum::<f64>()
            + cn * be(q1s) * lt1 * lt1
            - cn * a1 * be(q1s) * lt1
            + (1..=r2)
                .map(|j| be(q(j as f64, m)) * s[j - 1] * (s[j - 1] - a2))
                .sum::<f64>()
            + cm * be(q2s) * lt2 * lt2
            - cm * a2 * be(q2s) * lt2;
        let kk = (r1 + r2) as f64;
        let sigma = (-d + (d * d - 4.0 * kk * e).sqrt()) / (2.0 * kk);
        let th1 = ((a1 + b1 * sigma) / sigma).exp();
        let th2 = ((a2 + b2 * sigma) / sigma).exp();

        for (got, want) in [
            (fit.a1, a1),
            (fit.b1, b1),
            (fit.a2, a2),
            (fit.b2, b2),
            (fit.d, d),
            (fit.e, e),
            (fit.sigma, sigma),
        ] {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
        assert!((fit.r - th1 / (th1 + th2)).abs() < 1e-12);
    }

    #[test]
    fn scale_shift() {
        let data = scheme((35, 1.7), (40, 2.5));
        let c = std::f64::consts::E;
        let scaled = PairedData::new(data.x.rescaled(c).unwrap(), data.y.rescaled(c).unwrap());
        let a = amle_fit(&data).unwrap();
        let b = amle_fit(&scaled).unwrap();
        assert!((b.a1 - a.a1 - 1.0).abs() < 1e-12);
        assert!((b.a2 - a.a2 - 1.0).abs() < 1e-12);
        assert!((b.b1 - a.b1).abs() < 1e-12 && (b.b2 - a.b2).abs() < 1e-12);
        assert!((b.sigma - a.sigma).abs() < 1e-12);
        assert!((b.r - a.r).abs() < 1e-12);
    }

    #[test]
    fn tracks_the_mle_on_simulated_data() {
        let scheme = HybridScheme::new(100, 100, f64::INFINITY).unwrap();
        let mut rng = rng_from_seed(21);
        let reps = 200;
        let mut close = 0;
        for _ in 0..reps {
            let data = PairedData::new(
                generate_hybrid_sample(&scheme, 1.5, 1.0, &mut rng).unwrap(),
                generate_hybrid_sample(&scheme, 1.5, 1.0, &mut rng).unwrap(),
            );
            let a = amle_fit(&data).unwrap();
            assert!(a.e < 0.0);
            if (a.r - fit_mle(&data).unwrap().r).abs() < 0.05 {
                close += 1;
            }
        }
        assert!(close as f64 >= 0.95 * reps as f64, "{close}/{reps}");
    }
}
