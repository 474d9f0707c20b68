//! C interface to the stress-strength estimators.
//!
//! Every function returns an [`SsStatus`]. On failure a message describing
//! the error is kept per thread and can be read with
//! [`ss_last_error_message`]. Samples and posterior draws live behind opaque
//! handles that the caller frees with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use libc::c_char;

use stress_strength::amle::amle_fit;
use stress_strength::bayes::{
    credible_interval, gibbs_chain, hpd_interval, posterior_summary, GibbsOptions, PosteriorDraws, PriorSpec,
};
use stress_strength::censoring::{apply_scheme, HybridSample, HybridScheme, PairedData};
use stress_strength::error::Error;
use stress_strength::intervals::{asymptotic_ci, boot_p_ci, boot_t_ci, Interval};
use stress_strength::mle::fit_mle;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument, size mismatch or invalid scheme.
    InvalidArgument = 2,
    ZeroFailures = 3,
    DegenerateData = 4,
    NonConvergence = 5,
    /// The approximate likelihood equations have no valid root.
    AmleFailure = 6,
    /// Singular or indefinite information, or a nonpositive variance.
    InformationFailure = 7,
    BootstrapFailure = 8,
    ImproperPosterior = 9,
    InsufficientDraws = 10,
    IndexOutOfRange = 11,
    Panic = 12,
}

/// Which point estimate an asymptotic interval is centred on.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsEstimator {
    Mle = 0,
    Amle = 1,
}

/// Censoring plan: stop at the `r`-th failure or at `time_limit`, whichever
/// comes first. Pass `INFINITY` for plain failure censoring.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SsScheme {
    pub n: usize,
    pub r: usize,
    pub time_limit: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsFit {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub r: f64,
    /// Shape iterations; zero for the closed-form estimator.
    pub iterations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// An endpoint was clipped to [0, 1].
    pub clamped: bool,
}

/// Gamma prior on the shape and inverse gamma priors on the scales, as
/// (shape, rate) pairs: `a1, b1` for the strength scale, `a2, b2` for the
/// stress scale, `a3, b3` for the shape.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SsPrior {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub a3: f64,
    pub b3: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsDraw {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub r: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsSummary {
    pub mean: f64,
    pub variance: f64,
    pub acceptance_rate: f64,
}

/// Paired strength and stress samples.
pub struct SsData(PairedData);

/// Post burn-in draws of one chain.
pub struct SsDraws {
    draws: PosteriorDraws,
    r: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::Domain(_) | Error::SizeMismatch { .. } | Error::Config(_) => SsStatus::InvalidArgument,
        Error::ZeroFailures => SsStatus::ZeroFailures,
        Error::DegenerateData(_) => SsStatus::DegenerateData,
        Error::NonConvergence { .. } => SsStatus::NonConvergence,
        Error::NegativeDiscriminant(_) | Error::NonpositiveSigma(_) => SsStatus::AmleFailure,
        Error::SingularInformation | Error::InformationNotPositiveDefinite(_) | Error::NonpositiveVariance(_) => {
            SsStatus::InformationFailure
        }
        Error::TooManyFailedResamples { .. } | Error::CellAborted { .. } => SsStatus::BootstrapFailure,
        Error::ImproperPosterior(_) => SsStatus::ImproperPosterior,
        Error::EmptyChain | Error::InsufficientDraws { .. } => SsStatus::InsufficientDraws,
    }
}

struct Fail(SsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SsStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SsStatus::Panic
        }
    }
}

unsafe fn values<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn data_ref<'a>(data: *const SsData) -> Result<&'a PairedData, Fail> {
    data.as_ref().map(|d| &d.0).ok_or_else(|| null("data"))
}

unsafe fn draws_ref<'a>(draws: *const SsDraws) -> Result<&'a SsDraws, Fail> {
    draws.as_ref().ok_or_else(|| null("draws"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn scheme(s: SsScheme) -> Result<HybridScheme, Fail> {
    Ok(HybridScheme::new(s.n, s.r, s.time_limit)?)
}

fn interval(i: Interval) -> SsInterval {
    SsInterval {
        lower: i.lower,
        upper: i.upper,
        level: i.level,
        clamped: i.clamped,
    }
}

/// Censor two complete samples of sizes `scheme_x.n` and `scheme_y.n`.
///
/// # Safety
/// `x` and `y` must point to `nx` and `ny` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ss_data_from_raw(
    x: *const f64,
    nx: usize,
    scheme_x: SsScheme,
    y: *const f64,
    ny: usize,
    scheme_y: SsScheme,
    out: *mut *mut SsData,
) -> SsStatus {
    guard(|| {
        let sx = apply_scheme(values(x, nx, "x")?, &scheme(scheme_x)?)?;
        let sy = apply_scheme(values(y, ny, "y")?, &scheme(scheme_y)?)?;
        write(out, Box::into_raw(Box::new(SsData(PairedData::new(sx, sy)))))
    })
}

/// Build samples from the failures already observed under each plan.
///
/// # Safety
/// As for [`ss_data_from_raw`], with `dx` and `dy` observed failures.
#[no_mangle]
pub unsafe extern "C" fn ss_data_from_censored(
    x: *const f64,
    dx: usize,
    scheme_x: SsScheme,
    y: *const f64,
    dy: usize,
    scheme_y: SsScheme,
    out: *mut *mut SsData,
) -> SsStatus {
    guard(|| {
        let sx = HybridSample::from_observed(scheme(scheme_x)?, values(x, dx, "x")?.to_vec())?;
        let sy = HybridSample::from_observed(scheme(scheme_y)?, values(y, dy, "y")?.to_vec())?;
        write(out, Box::into_raw(Box::new(SsData(PairedData::new(sx, sy)))))
    })
}

/// Observed failure counts of the strength and stress samples.
///
/// # Safety
/// `data` must come from one of the constructors; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_data_failures(data: *const SsData, dx: *mut usize, dy: *mut usize) -> SsStatus {
    guard(|| {
        let d = data_ref(data)?;
        write(dx, d.x.d())?;
        write(dy, d.y.d())
    })
}

/// # Safety
/// `data` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_data_free(data: *mut SsData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Maximum likelihood fit with default solver settings.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_mle_fit(data: *const SsData, out: *mut SsFit) -> SsStatus {
    guard(|| {
        let f = fit_mle(data_ref(data)?)?;
        write(
            out,
            SsFit {
                alpha: f.alpha,
                theta1: f.theta1,
                theta2: f.theta2,
                r: f.r,
                iterations: f.iterations,
            },
        )
    })
}

/// Closed-form approximate maximum likelihood fit.
///
/// # Safety
/// As for [`ss_mle_fit`].
#[no_mangle]
pub unsafe extern "C" fn ss_amle_fit(data: *const SsData, out: *mut SsFit) -> SsStatus {
    guard(|| {
        let f = amle_fit(data_ref(data)?)?;
        write(
            out,
            SsFit {
                alpha: f.alpha,
                theta1: f.theta1,
                theta2: f.theta2,
                r: f.r,
                iterations: 0,
            },
        )
    })
}

/// Delta-method interval of level `1 - gamma` around the chosen estimate.
///
/// # Safety
/// As for [`ss_mle_fit`].
#[no_mangle]
pub unsafe extern "C" fn ss_asymptotic_ci(
    data: *const SsData,
    estimator: SsEstimator,
    gamma: f64,
    out: *mut SsInterval,
) -> SsStatus {
    guard(|| {
        let d = data_ref(data)?;
        let params = match estimator {
            SsEstimator::Mle => fit_mle(d)?.params(),
            SsEstimator::Amle => amle_fit(d)?.params(),
        };
        write(out, interval(asymptotic_ci(&params, d, gamma)?))
    })
}

/// Percentile bootstrap interval from `nboot` resamples.
///
/// # Safety
/// As for [`ss_mle_fit`].
#[no_mangle]
pub unsafe extern "C" fn ss_boot_p_ci(
    data: *const SsData,
    nboot: usize,
    gamma: f64,
    seed: u64,
    out: *mut SsInterval,
) -> SsStatus {
    guard(|| write(out, interval(boot_p_ci(data_ref(data)?, nboot, gamma, seed)?)))
}

/// Studentized bootstrap interval from `nboot` resamples.
///
/// # Safety
/// As for [`ss_mle_fit`].
#[no_mangle]
pub unsafe extern "C" fn ss_boot_t_ci(
    data: *const SsData,
    nboot: usize,
    gamma: f64,
    seed: u64,
    out: *mut SsInterval,
) -> SsStatus {
    guard(|| write(out, interval(boot_t_ci(data_ref(data)?, nboot, gamma, seed)?)))
}

/// Run one chain of `m` kept draws after `burn_in` discarded sweeps,
/// started at the maximum likelihood fit. A null `prior` means the
/// noninformative prior.
///
/// # Safety
/// `data` must be a live handle, `prior` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_gibbs_chain(
    data: *const SsData,
    prior: *const SsPrior,
    m: usize,
    burn_in: usize,
    proposal_sd: f64,
    seed: u64,
    out: *mut *mut SsDraws,
) -> SsStatus {
    guard(|| {
        let d = data_ref(data)?;
        let prior = match prior.as_ref() {
            None => PriorSpec::prior1(),
            Some(p) => PriorSpec::new(p.a1, p.b1, p.a2, p.b2, p.a3, p.b3)?,
        };
        let mut opts = GibbsOptions::new(seed);
        opts.m = m;
        opts.burn_in = burn_in;
        opts.proposal_sd = proposal_sd;
        let draws = gibbs_chain(d, &prior, &opts)?;
        let r = draws.r_values();
        write(out, Box::into_raw(Box::new(SsDraws { draws, r })))
    })
}

/// Number of kept draws, or zero for a null handle.
///
/// # Safety
/// `draws` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_draws_len(draws: *const SsDraws) -> usize {
    draws.as_ref().map_or(0, |d| d.r.len())
}

/// # Safety
/// `draws` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_draws_get(draws: *const SsDraws, index: usize, out: *mut SsDraw) -> SsStatus {
    guard(|| {
        let d = draws_ref(draws)?;
        let Some(x) = d.draws.draws.get(index) else {
            return Err(Fail(
                SsStatus::IndexOutOfRange,
                format!("draw {index} out of range for {} draws", d.r.len()),
            ));
        };
        write(
            out,
            SsDraw {
                alpha: x.alpha,
                theta1: x.theta1,
                theta2: x.theta2,
                r: x.r,
            },
        )
    })
}

/// Posterior mean and variance of the reliability.
///
/// # Safety
/// As for [`ss_draws_get`].
#[no_mangle]
pub unsafe extern "C" fn ss_draws_summary(draws: *const SsDraws, out: *mut SsSummary) -> SsStatus {
    guard(|| {
        let d = draws_ref(draws)?;
        let (mean, variance) = posterior_summary(&d.r)?;
        write(
            out,
            SsSummary {
                mean,
                variance,
                acceptance_rate: d.draws.acceptance_rate,
            },
        )
    })
}

/// Equal-tailed credible interval of level `1 - gamma`.
///
/// # Safety
/// As for [`ss_draws_get`].
#[no_mangle]
pub unsafe extern "C" fn ss_draws_credible(draws: *const SsDraws, gamma: f64, out: *mut SsInterval) -> SsStatus {
    guard(|| write(out, interval(credible_interval(&draws_ref(draws)?.r, gamma)?)))
}

/// Shortest interval holding a `1 - gamma` share of the draws.
///
/// # Safety
/// As for [`ss_draws_get`].
#[no_mangle]
pub unsafe extern "C" fn ss_draws_hpd(draws: *const SsDraws, gamma: f64, out: *mut SsInterval) -> SsStatus {
    guard(|| write(out, interval(hpd_interval(&draws_ref(draws)?.r, gamma)?)))
}

/// # Safety
/// `draws` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_draws_free(draws: *mut SsDraws) {
    if !draws.is_null() {
        drop(Box::from_raw(draws));
    }
}

/// Message for the last failed call on this thread, or null after a
/// successful one. The pointer stays valid until the next call on the same
/// thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
