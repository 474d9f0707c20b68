//! Confidence intervals for `R`: the delta-method interval built from the
//! observed information, and the percentile (Boot-p) and studentized (Boot-t)
//! nonparametric bootstraps.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censoring::{CensoringCase, HybridSample, HybridScheme, PairedData};
use crate::dist::{std_normal_quantile, WeibullParams};
use crate::error::{domain, Error, Result};
use crate::mle::{fit_mle, PowerSums};
use crate::rng::{derive_seed, rng_from_seed};

/// Negative Hessian of the log-likelihood in `(alpha, theta1, theta2)`.
///
/// The two scales never appear together in one term, so the
/// `(theta1, theta2)` entry is identically zero and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationMatrix {
    pub i11: f64,
    pub i12: f64,
    pub i13: f64,
    pub i22: f64,
    pub i33: f64,
}

impl InformationMatrix {
    pub fn i23(&self) -> f64 {
        0.0
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.i11, self.i12, self.i13, //
            self.i12, self.i22, 0.0, //
            self.i13, 0.0, self.i33,
        )
    }

    /// Determinant `I11 I22 I33 - I12^2 I33 - I13^2 I22`.
    pub fn determinant(&self) -> f64 {
        self.i11 * self.i22 * self.i33 - self.i12 * self.i12 * self.i33 - self.i13 * self.i13 * self.i22
    }

    pub fn leading_minors(&self) -> [f64; 3] {
        [self.i11, self.i11 * self.i22 - self.i12 * self.i12, self.determinant()]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors().iter().all(|m| *m > 0.0)
    }

    pub fn ensure_positive_definite(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::InformationNotPositiveDefinite(self.leading_minors()))
        }
    }
}

pub fn observed_information(params: &WeibullParams, data: &PairedData) -> Result<InformationMatrix> {
    let p = WeibullParams::new(params.alpha, params.theta1, params.theta2)?;
    let (d1, d2) = (data.x.d() as f64, data.y.d() as f64);
    let sx = PowerSums::new(&data.x, p.alpha);
    let sy = PowerSums::new(&data.y, p.alpha);
    let (t1, t2) = (p.theta1, p.theta2);
    Ok(InformationMatrix {
        i11: (d1 + d2) / (p.alpha * p.alpha) + sx.s_second() / t1 + sy.s_second() / t2,
        i12: -sx.s_prime() / (t1 * t1),
        i13: -sy.s_prime() / (t2 * t2),
        i22: -d1 / (t1 * t1) + 2.0 * sx.s() / (t1 * t1 * t1),
        i33: -d2 / (t2 * t2) + 2.0 * sy.s() / (t2 * t2 * t2),
    })
}

fn gradient_of_r(theta1: f64, theta2: f64) -> Vector3<f64> {
    let s = theta1 + theta2;
    Vector3::new(0.0, theta2, -theta1) / (s * s)
}

/// Delta-method variance of `R = theta1/(theta1 + theta2)`, in closed form.
pub fn delta_variance(params: &WeibullParams, info: &InformationMatrix) -> Result<f64> {
    let u = info.determinant();
    if !(u.is_finite() && u != 0.0) {
        return Err(Error::SingularInformation);
    }
    let (t1, t2) = (params.theta1, params.theta2);
    let s2 = (t1 + t2) * (t1 + t2);
    let num = (info.i11 * info.i22 - info.i12 * info.i12) * t1 * t1 - 2.0 * info.i12 * info.i13 * t1 * t2
        + (info.i11 * info.i33 - info.i13 * info.i13) * t2 * t2;
    let b = num / (u * s2 * s2);
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::NonpositiveVariance(b));
    }
    Ok(b)
}

/// The same variance as `b' I^{-1} b` through a general 3x3 inverse.
pub fn delta_variance_generic(params: &WeibullParams, info: &InformationMatrix) -> Result<f64> {
    let inv = info.to_matrix().try_inverse().ok_or(Error::SingularInformation)?;
    let b = gradient_of_r(params.theta1, params.theta2);
    let v = (b.transpose() * inv * b)[0];
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::NonpositiveVariance(v));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Asymptotic,
    BootP,
    BootT,
    Credible,
    Hpd,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Asymptotic => "asymptotic",
            Method::BootP => "boot-p",
            Method::BootT => "boot-t",
            Method::Credible => "credible",
            Method::Hpd => "hpd",
        }
    }
}

/// Interval for `R`. `clamped` records whether an endpoint was pulled back
/// into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: Method,
    pub clamped: bool,
}

impl Interval {
    /// Build an interval for a probability, clamping to `[0, 1]`.
    pub fn for_probability(lower: f64, upper: f64, level: f64, method: Method) -> Result<Self> {
        if !(lower <= upper) {
            return Err(domain(format!("interval endpoints out of order: ({lower}, {upper})")));
        }
        let (lo, hi) = (lower.max(0.0), upper.min(1.0));
        Ok(Self {
            lower: lo,
            upper: hi,
            level,
            method,
            clamped: lo != lower || hi != upper,
        })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("gamma must lie in (0, 1), got {gamma}")))
    }
}

/// `R_hat -/+ z_{1 - gamma/2} sqrt(B)` with the information evaluated at the
/// plug-in estimates (MLE or AMLE).
pub fn asymptotic_ci(params: &WeibullParams, data: &PairedData, gamma: f64) -> Result<Interval> {
    check_gamma(gamma)?;
    let info = observed_information(params, data)?;
    info.ensure_positive_definite()?;
    let b = delta_variance(params, &info)?;
    let z = std_normal_quantile(1.0 - gamma / 2.0)?;
    let r = params.reliability();
    let half = z * b.sqrt();
    Interval::for_probability(r - half, r + half, 1.0 - gamma, Method::Asymptotic)
}

/// 1-based order-statistic ranks `floor(N gamma/2)` and `floor(N (1 - gamma/2))`,
/// each at least 1.
pub fn percentile_ranks(len: usize, gamma: f64) -> (usize, usize) {
    let n = len as f64;
    let lo = ((n * gamma / 2.0).floor() as usize).max(1);
    let hi = ((n * (1.0 - gamma / 2.0)).floor() as usize).clamp(1, len.max(1));
    (lo, hi)
}

/// Lower and upper percentile order statistics of `values`.
pub fn percentile_endpoints(values: &[f64], gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if values.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_ranks(sorted.len(), gamma);
    Ok((sorted[lo - 1], sorted[hi - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub nboot: usize,
    pub gamma: f64,
    pub seed: u64,
    /// Keep each sample's censoring scheme on the resamples. When off, a
    /// resample is treated as a complete sample of its `d` values.
    pub recensor: bool,
}

impl BootstrapOptions {
    pub fn new(nboot: usize, gamma: f64, seed: u64) -> Self {
        Self {
            nboot,
            gamma,
            seed,
            recensor: true,
        }
    }
}

/// Both bootstrap intervals plus the replicates they were read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub boot_p: Interval,
    pub boot_t: Interval,
    /// `R*` of every fitted resample, in resample order.
    pub r_star: Vec<f64>,
    /// Studentized `T*`, in resample order, for resamples with a usable variance.
    pub t_star: Vec<f64>,
    pub failed_fits: usize,
    pub failed_studentizations: usize,
}

fn resample_one(s: &HybridSample, recensor: bool, rng: &mut crate::rng::Rng) -> Result<HybridSample> {
    use rand::Rng as _;
    let d = s.d();
    let mut times: Vec<f64> = (0..d).map(|_| s.times()[rng.random_range(0..d)]).collect();
    times.sort_by(f64::total_cmp);
    let last = times[d - 1];
    if !recensor {
        return HybridSample::new(HybridScheme::complete(d)?, times, last, CensoringCase::CaseI);
    }
    // With (n, r, T) fixed and d resampled failures, all at most the old u:
    // a case I sample still stops at its last failure, a case II one at T.
    match s.case() {
        CensoringCase::CaseI => HybridSample::new(*s.scheme(), times, last, CensoringCase::CaseI),
        CensoringCase::CaseII => HybridSample::new(*s.scheme(), times, s.u(), CensoringCase::CaseII),
    }
}

/// Resample `data` for bootstrap replicate `index`. The stream depends only
/// on `(seed, index)`.
pub fn bootstrap_resample(data: &PairedData, seed: u64, index: usize, recensor: bool) -> Result<PairedData> {
    let mut rng = rng_from_seed(derive_seed(seed, &[index as u64]));
    let x = resample_one(&data.x, recensor, &mut rng)?;
    let y = resample_one(&data.y, recensor, &mut rng)?;
    Ok(PairedData::new(x, y))
}

fn variance_at(params: &WeibullParams, data: &PairedData) -> Result<f64> {
    let info = observed_information(params, data)?;
    delta_variance(params, &info)
}

/// Boot-p and Boot-t from one set of resamples.
pub fn bootstrap(data: &PairedData, opts: &BootstrapOptions) -> Result<BootstrapResult> {
    check_gamma(opts.gamma)?;
    if opts.nboot < 2 {
        return Err(domain(format!("need at least 2 resamples, got {}", opts.nboot)));
    }
    let fit = fit_mle(data)?;
    let r_hat = fit.r;
    let sd_hat = variance_at(&fit.params(), data)?.sqrt();

    let reps: Vec<Option<(f64, Option<f64>)>> = (0..opts.nboot)
        .into_par_iter()
        .map(|b| {
            let sample = bootstrap_resample(data, opts.seed, b, opts.recensor).ok()?;
            let f = fit_mle(&sample).ok()?;
            let t = variance_at(&f.params(), &sample)
                .ok()
                .map(|v| (f.r - r_hat) / v.sqrt())
                .filter(|t| t.is_finite());
            Some((f.r, t))
        })
        .collect();

    let r_star: Vec<f64> = reps.iter().flatten().map(|(r, _)| *r).collect();
    let t_star: Vec<f64> = reps.iter().flatten().filter_map(|(_, t)| *t).collect();
    let failed_fits = opts.nboot - r_star.len();
    let failed_studentizations = r_star.len() - t_star.len();
    let limit = opts.nboot as f64 * 0.2;
    if failed_fits as f64 > limit {
        return Err(Error::TooManyFailedResamples {
            failed: failed_fits,
            total: opts.nboot,
        });
    }
    if (failed_fits + failed_studentizations) as f64 > limit {
        return Err(Error::TooManyFailedResamples {
            failed: failed_fits + failed_studentizations,
            total: opts.nboot,
        });
    }

    let level = 1.0 - opts.gamma;
    let (p_lo, p_hi) = percentile_endpoints(&r_star, opts.gamma)?;
    let (t_lo, t_hi) = percentile_endpoints(&t_star, opts.gamma)?;
    Ok(BootstrapResult {
        boot_p: Interval::for_probability(p_lo, p_hi, level, Method::BootP)?,
        boot_t: Interval::for_probability(r_hat + t_lo * sd_hat, r_hat + t_hi * sd_hat, level, Method::BootT)?,
        r_star,
        t_star,
        failed_fits,
        failed_studentizations,
    })
}

/// Percentile bootstrap interval.
pub fn boot_p_ci(data: &PairedData, nboot: usize, gamma: f64, seed: u64) -> Result<Interval> {
    bootstrap(data, &BootstrapOptions::new(nboot, gamma, seed)).map(|b| b.boot_p)
}

/// Studentized bootstrap interval.
pub fn boot_t_ci(data: &PairedData, nboot: usize, gamma: f64, seed: u64) -> Result<Interval> {
    bootstrap(data, &BootstrapOptions::new(nboot, gamma, seed)).map(|b| b.boot_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amle::amle_fit;
    use crate::censoring::{apply_scheme, generate_hybrid_sample};
    use crate::datasets;
    use crate::mle::score;
    use proptest::prelude::*;

    fn case_study(x: (usize, f64), y: (usize, f64)) -> PairedData {
        PairedData::new(
            apply_scheme(&datasets::strength_shifted(), &HybridScheme::new(69, x.0, x.1).unwrap()).unwrap(),
            apply_scheme(&datasets::stress_shifted(), &HybridScheme::new(63, y.0, y.1).unwrap()).unwrap(),
        )
    }

    fn scheme1() -> PairedData {
        case_study((45, 2.5), (40, 2.5))
    }

    fn small_sim(seed: u64, n: usize, r: usize, t: f64) -> Option<PairedData> {
        let s = HybridScheme::new(n, r, t).unwrap();
        let mut rng = rng_from_seed(seed);
        Some(PairedData::new(
            generate_hybrid_sample(&s, 1.5, 1.0, &mut rng).ok()?,
            generate_hybrid_sample(&s, 1.5, 1.0, &mut rng).ok()?,
        ))
    }

    fn fd_hessian(p: &WeibullParams, data: &PairedData) -> Matrix3<f64> {
        let x = [p.alpha, p.theta1, p.theta2];
        let mut h = Matrix3::zeros();
        for j in 0..3 {
            let step = 1e-5 * x[j];
            let mut up = x;
            let mut dn = x;
            up[j] += step;
            dn[j] -= step;
            let g = |v: [f64; 3]| score(&WeibullParams::new(v[0], v[1], v[2]).unwrap(), data).unwrap();
            let (gu, gd) = (g(up), g(dn));
            for i in 0..3 {
                h[(i, j)] = -(gu[i] - gd[i]) / (2.0 * step);
            }
        }
        h
    }

    #[test]
    fn scale_cross_term_is_zero() {
        let data = scheme1();
        let p = WeibullParams::new(2.3, 0.7, 4.1).unwrap();
        let info = observed_information(&p, &data).unwrap();
        assert_eq!(info.i23(), 0.0);
        let m = info.to_matrix();
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn scale_entry_at_the_mle() {
        let data = scheme1();
        let fit = fit_mle(&data).unwrap();
        let info = observed_information(&fit.params(), &data).unwrap();
        let want = data.x.d() as f64 / (fit.theta1 * fit.theta1);
        assert!((info.i22 - want).abs() < 1e-8 * want);
        let want = data.y.d() as f64 / (fit.theta2 * fit.theta2);
        assert!((info.i33 - want).abs() < 1e-8 * want);
        assert!(info.is_positive_definite());
    }

    #[test]
    fn information_matches_finite_differences() {
        let data = scheme1();
        let fit = fit_mle(&data).unwrap();
        for p in [fit.params(), WeibullParams::new(3.0, 10.0, 30.0).unwrap()] {
            let a = observed_information(&p, &data).unwrap().to_matrix();
            let h = fd_hessian(&p, &data);
            for i in 0..3 {
                for j in 0..3 {
                    let scale = a[(i, i)].abs().sqrt() * a[(j, j)].abs().sqrt();
                    assert!(
                        (a[(i, j)] - h[(i, j)]).abs() < 1e-4 * scale,
                        "({i},{j}): {} vs {}",
                        a[(i, j)],
                        h[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn equal_scales_closed_form() {
        let data = scheme1();
        let p = WeibullParams::new(4.0, 5.0, 5.0).unwrap();
        let info = observed_information(&p, &data).unwrap();
        let t = p.theta1;
        let want =
            (info.i11 * (info.i22 + info.i33) - info.i12 * info.i12 - info.i13 * info.i13 - 2.0 * info.i12 * info.i13)
                * t
                * t
                / (info.determinant() * 16.0 * t.powi(4));
        let got = delta_variance(&p, &info).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
        assert!((delta_variance_generic(&p, &info).unwrap() - want).abs() < 1e-10 * want);
    }

    #[test]
    fn singular_information_is_reported() {
        let info = InformationMatrix {
            i11: 1.0,
            i12: 1.0,
            i13: 0.0,
            i22: 1.0,
            i33: 1.0,
        };
        let p = WeibullParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(delta_variance(&p, &info), Err(Error::SingularInformation));
        assert!(info.ensure_positive_definite().is_err());
    }

    #[test]
    fn positive_variance_on_random_fits() {
        let mut count = 0;
        for seed in 0..100u64 {
            let Some(data) = small_sim(seed, 20, 15, 1.5) else {
                continue;
            };
            let Ok(fit) = fit_mle(&data) else { continue };
            let info = observed_information(&fit.params(), &data).unwrap();
            let b = delta_variance(&fit.params(), &info).unwrap();
            let g = delta_variance_generic(&fit.params(), &info).unwrap();
            assert!(b > 0.0);
            assert!((b - g).abs() <= 1e-10 * b);
            count += 1;
        }
        assert!(count >= 95);
    }

    #[test]
    fn asymptotic_interval_shape() {
        let data = scheme1();
        let fit = fit_mle(&data).unwrap();
        let ci = asymptotic_ci(&fit.params(), &data, 0.05).unwrap();
        assert!(!ci.clamped);
        assert!(((ci.lower + ci.upper) / 2.0 - fit.r).abs() < 1e-14);
        let wide = asymptotic_ci(&fit.params(), &data, 0.01).unwrap();
        let narrow = asymptotic_ci(&fit.params(), &data, 0.99).unwrap();
        assert!(wide.lower <= narrow.lower && narrow.upper <= wide.upper);
        assert!(asymptotic_ci(&fit.params(), &data, 0.0).is_err());

        let am = amle_fit(&data).unwrap();
        let ci = asymptotic_ci(&am.params(), &data, 0.05).unwrap();
        assert!(ci.contains(am.r));
    }

    #[test]
    fn clamping_is_flagged() {
        let ci = Interval::for_probability(-0.1, 0.4, 0.95, Method::Asymptotic).unwrap();
        assert_eq!((ci.lower, ci.clamped), (0.0, true));
        assert!(Interval::for_probability(0.5, 0.4, 0.95, Method::Asymptotic).is_err());
    }

    #[test]
    fn percentile_rank_examples() {
        assert_eq!(percentile_ranks(100, 0.05), (2, 97));
        assert_eq!(percentile_ranks(250, 0.05), (6, 243));
        assert_eq!(percentile_ranks(10, 0.05), (1, 9));
    }

    #[test]
    fn bootstrap_is_deterministic_and_reads_order_statistics() {
        let data = scheme1();
        let opts = BootstrapOptions::new(60, 0.1, 17);
        let a = bootstrap(&data, &opts).unwrap();
        let b = bootstrap(&data, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.boot_p.lower <= a.boot_p.upper && a.boot_t.lower <= a.boot_t.upper);
        assert!(a.r_star.contains(&a.boot_p.lower) && a.r_star.contains(&a.boot_p.upper));
        let mut sorted = a.r_star.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = percentile_ranks(sorted.len(), 0.1);
        assert_eq!((a.boot_p.lower, a.boot_p.upper), (sorted[lo - 1], sorted[hi - 1]));
        assert_eq!(boot_p_ci(&data, 60, 0.1, 17).unwrap(), a.boot_p);
        assert_eq!(boot_t_ci(&data, 60, 0.1, 17).unwrap(), a.boot_t);
        assert_ne!(
            bootstrap(&data, &BootstrapOptions::new(60, 0.1, 18)).unwrap().r_star,
            a.r_star
        );
    }

    #[test]
    fn resamples_keep_the_scheme() {
        let data = case_study((35, 1.7), (40, 2.5));
        for i in 0..20 {
            let s = bootstrap_resample(&data, 3, i, true).unwrap();
            assert_eq!(s.x.case(), CensoringCase::CaseII);
            assert_eq!((s.x.d(), s.x.u()), (data.x.d(), 1.7));
            assert_eq!(s.y.case(), CensoringCase::CaseI);
            assert_eq!(s.y.u(), *s.y.times().last().unwrap());
            let off = bootstrap_resample(&data, 3, i, false).unwrap();
            assert_eq!(off.x.n(), data.x.d());
            assert_eq!(off.x.survivors(), 0);
        }
    }

    #[test]
    fn identical_resamples_collapse_the_interval() {
        // one failure per sample: every resample reproduces the data
        let s = HybridScheme::new(5, 3, 2.0).unwrap();
        let data = PairedData::new(
            HybridSample::from_observed(s, vec![1.0]).unwrap(),
            HybridSample::from_observed(s, vec![0.5]).unwrap(),
        );
        let r_hat = fit_mle(&data).unwrap().r;
        let b = bootstrap(&data, &BootstrapOptions::new(20, 0.05, 1)).unwrap();
        assert!(b.t_star.iter().all(|t| *t == 0.0));
        assert_eq!((b.boot_t.lower, b.boot_t.upper), (r_hat, r_hat));
        assert_eq!((b.boot_p.lower, b.boot_p.upper), (r_hat, r_hat));
    }

    #[test]
    fn constant_data_is_degenerate() {
        let s = HybridScheme::new(4, 4, 10.0).unwrap();
        let data = PairedData::new(
            HybridSample::from_observed(s, vec![2.0; 4]).unwrap(),
            HybridSample::from_observed(s, vec![2.0; 4]).unwrap(),
        );
        assert!(matches!(boot_p_ci(&data, 10, 0.05, 1), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn asymptotic_coverage_band() {
        let scheme = HybridScheme::new(30, 25, 2.0).unwrap();
        let reps = 500;
        let mut covered = 0;
        let mut used = 0;
        for rep in 0..reps {
            let mut rng = rng_from_seed(derive_seed(2024, &[rep]));
            let (Ok(x), Ok(y)) = (
                generate_hybrid_sample(&scheme, 1.5, 1.0, &mut rng),
                generate_hybrid_sample(&scheme, 1.5, 1.0, &mut rng),
            ) else {
                continue;
            };
            let data = PairedData::new(x, y);
            let Ok(fit) = fit_mle(&data) else { continue };
            let ci = asymptotic_ci(&fit.params(), &data, 0.05).unwrap();
            used += 1;
            covered += ci.contains(0.5) as usize;
        }
        let rate = covered as f64 / used as f64;
        assert!(used >= 495);
        assert!((0.90..=0.99).contains(&rate), "{rate}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn closed_and_generic_variance_agree(seed in any::<u64>(), a in 0.3f64..6.0, t1 in 0.1f64..5.0, t2 in 0.1f64..5.0) {
            if let Some(data) = small_sim(seed, 15, 12, 1.2) {
                let p = WeibullParams::new(a, t1, t2).unwrap();
                let info = observed_information(&p, &data).unwrap();
                if info.is_positive_definite() {
                    let b = delta_variance(&p, &info).unwrap();
                    let g = delta_variance_generic(&p, &info).unwrap();
                    prop_assert!((b - g).abs() <= 1e-10 * b);
                }
            }
        }
    }
}
