//! Hybrid (Type-I / Type-II) censoring.
//!
//! A life test of `n` units stops at the earlier of the `r`-th failure and a
//! fixed time `T`. When the `r`-th failure comes first (case I) the test ends
//! at that failure; otherwise (case II) it ends at `T` with fewer than `r`
//! failures observed. Either way the sample records the observed failures and
//! the censoring point `u`; the remaining `n - d` units are known only to
//! survive past `u`.

use serde::{Deserialize, Serialize};

use crate::dist::weibull_sample;
use crate::error::{domain, Error, Result};
use crate::rng::Rng;

/// Censoring design for one sample: `n` units, failure budget `r`, time
/// budget `time_limit` (may be `+inf` for pure Type-II).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridScheme {
    pub n: usize,
    pub r: usize,
    #[serde(with = "time_limit_serde")]
    pub time_limit: f64,
}

// JSON has no infinity; an unbounded time limit is written as "inf".
mod time_limit_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        if t.is_finite() {
            s.serialize_f64(*t)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(de::Error::custom(format!("invalid time limit {t:?}"))),
        }
    }
}

impl HybridScheme {
    pub fn new(n: usize, r: usize, time_limit: f64) -> Result<Self> {
        if r == 0 || r > n {
            return Err(domain(format!("need 1 <= r <= n, got r={r}, n={n}")));
        }
        if !(time_limit > 0.0) {
            return Err(domain(format!("time limit must be positive, got {time_limit}")));
        }
        Ok(Self { n, r, time_limit })
    }

    /// Pure Type-II censoring at the `r`-th failure.
    pub fn type_ii(n: usize, r: usize) -> Result<Self> {
        Self::new(n, r, f64::INFINITY)
    }

    /// No censoring at all.
    pub fn complete(n: usize) -> Result<Self> {
        Self::type_ii(n, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CensoringCase {
    /// The `r`-th failure occurred before the time limit.
    CaseI,
    /// The time limit was reached first.
    CaseII,
}

/// Observed part of a hybrid censored sample.
///
/// `times` is sorted and nondecreasing (ties are kept), all entries are at
/// most `u`, and at least one failure is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSample {
    scheme: HybridScheme,
    times: Vec<f64>,
    u: f64,
    case: CensoringCase,
}

impl HybridSample {
    /// Assemble a sample from its parts, checking every invariant.
    pub fn new(scheme: HybridScheme, times: Vec<f64>, u: f64, case: CensoringCase) -> Result<Self> {
        let d = times.len();
        if d == 0 {
            return Err(Error::ZeroFailures);
        }
        if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(domain("lifetimes must be positive and finite"));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain("observed times must be sorted"));
        }
        if d > scheme.r {
            return Err(domain(format!("{d} failures exceed the budget r={}", scheme.r)));
        }
        let last = times[d - 1];
        match case {
            CensoringCase::CaseI => {
                if d != scheme.r || u != last || last > scheme.time_limit {
                    return Err(domain("case I requires d = r and u = x_(r) <= T"));
                }
            }
            CensoringCase::CaseII => {
                if d >= scheme.r || !scheme.time_limit.is_finite() || u != scheme.time_limit || last > scheme.time_limit
                {
                    return Err(domain("case II requires d < r and u = T >= x_(d)"));
                }
            }
        }
        Ok(Self { scheme, times, u, case })
    }

    /// Build a sample from already-censored observations: `d = r` failures
    /// means the test stopped at the last one, fewer means it stopped at `T`.
    pub fn from_observed(scheme: HybridScheme, mut times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| t.is_nan()) {
            return Err(domain("lifetimes must not be NaN"));
        }
        times.sort_by(f64::total_cmp);
        if times.is_empty() {
            return Err(Error::ZeroFailures);
        }
        if times.len() == scheme.r {
            let u = times[times.len() - 1];
            Self::new(scheme, times, u, CensoringCase::CaseI)
        } else {
            Self::new(scheme, times, scheme.time_limit, CensoringCase::CaseII)
        }
    }

    pub fn scheme(&self) -> &HybridScheme {
        &self.scheme
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of observed failures.
    pub fn d(&self) -> usize {
        self.times.len()
    }

    /// Censoring point.
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn case(&self) -> CensoringCase {
        self.case
    }

    pub fn n(&self) -> usize {
        self.scheme.n
    }

    /// Units still running when the test stopped.
    pub fn survivors(&self) -> usize {
        self.scheme.n - self.times.len()
    }

    /// Multiply every lifetime (and the time limit) by `c`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(domain(format!("scale factor must be positive, got {c}")));
        }
        let scheme = HybridScheme {
            time_limit: self.scheme.time_limit * c,
            ..self.scheme
        };
        Self::new(
            scheme,
            self.times.iter().map(|t| t * c).collect(),
            self.u * c,
            self.case,
        )
    }
}

/// Apply a hybrid censoring scheme to `n` complete lifetimes.
pub fn apply_scheme(raw: &[f64], scheme: &HybridScheme) -> Result<HybridSample> {
    if raw.len() != scheme.n {
        return Err(Error::SizeMismatch {
            expected: scheme.n,
            got: raw.len(),
        });
    }
    if raw.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(domain("lifetimes must be positive and finite"));
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rth = sorted[scheme.r - 1];
    if rth <= scheme.time_limit {
        sorted.truncate(scheme.r);
        Ok(HybridSample {
            scheme: *scheme,
            times: sorted,
            u: rth,
            case: CensoringCase::CaseI,
        })
    } else {
        let d = sorted.partition_point(|&t| t <= scheme.time_limit);
        if d == 0 {
            return Err(Error::ZeroFailures);
        }
        sorted.truncate(d);
        Ok(HybridSample {
            scheme: *scheme,
            times: sorted,
            u: scheme.time_limit,
            case: CensoringCase::CaseII,
        })
    }
}

/// Simulate a hybrid censored Weibull sample.
pub fn generate_hybrid_sample(scheme: &HybridScheme, alpha: f64, theta: f64, rng: &mut Rng) -> Result<HybridSample> {
    let raw = weibull_sample(scheme.n, alpha, theta, rng)?;
    apply_scheme(&raw, scheme)
}

/// Strength (`x`) and stress (`y`) samples censored independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedData {
    pub x: HybridSample,
    pub y: HybridSample,
}

impl PairedData {
    pub fn new(x: HybridSample, y: HybridSample) -> Self {
        Self { x, y }
    }

    /// Exchange the roles of strength and stress.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn total_failures(&self) -> usize {
        self.x.d() + self.y.d()
    }
}
