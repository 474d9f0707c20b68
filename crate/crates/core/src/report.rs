//! Result records shared by the library entry points, the CLI and the FFI.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::amle::{amle_fit, AmleFit};
use crate::bayes::{credible_interval, gibbs_chain, hpd_interval, posterior_summary, GibbsOptions, PriorSpec};
use crate::censoring::{HybridScheme, PairedData};
use crate::error::Result;
use crate::intervals::{asymptotic_ci, bootstrap, BootstrapOptions, Interval};
use crate::mle::{solve_alpha_fixed_point, MleFit, MleOptions};
use crate::rng::derive_seed;

/// Where an output came from: enough to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub schemes: Vec<HybridScheme>,
    pub seeds: Vec<u64>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: Vec::new(),
            schemes: Vec::new(),
            seeds: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// An interval together with the point estimator it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInterval {
    pub estimator: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesReport {
    pub prior_label: String,
    pub prior: PriorSpec,
    pub mean: f64,
    pub variance: f64,
    pub credible: Interval,
    pub hpd: Option<Interval>,
    pub acceptance_rate: f64,
    pub draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub label: String,
    pub mle: MleFit,
    pub amle: AmleFit,
    pub intervals: Vec<LabeledInterval>,
    pub bayes: Vec<BayesReport>,
}

impl EstimateReport {
    /// Plain-text rendering. Numbers use the shortest representation that
    /// parses back to the same value.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.label);
        let _ = writeln!(
            s,
            "MLE   R = {}  (alpha = {}, theta1 = {}, theta2 = {}, {} iterations)",
            self.mle.r, self.mle.alpha, self.mle.theta1, self.mle.theta2, self.mle.iterations
        );
        let _ = writeln!(
            s,
            "AMLE  R = {}  (alpha = {}, theta1 = {}, theta2 = {})",
            self.amle.r, self.amle.alpha, self.amle.theta1, self.amle.theta2
        );
        for li in &self.intervals {
            let i = &li.interval;
            let _ = writeln!(
                s,
                "{:<10} {:<5} {}%  ({}, {}){}",
                i.method.label(),
                li.estimator,
                i.level * 100.0,
                i.lower,
                i.upper,
                if i.clamped { "  [clamped]" } else { "" }
            );
        }
        for b in &self.bayes {
            let _ = writeln!(
                s,
                "Bayes ({})  R = {}  var = {}  acceptance = {}",
                b.prior_label, b.mean, b.variance, b.acceptance_rate
            );
            let _ = writeln!(
                s,
                "credible   {}%  ({}, {})",
                b.credible.level * 100.0,
                b.credible.lower,
                b.credible.upper
            );
            if let Some(h) = &b.hpd {
                let _ = writeln!(s, "hpd        {}%  ({}, {})", h.level * 100.0, h.lower, h.upper);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesRequest {
    pub prior_label: String,
    pub prior: PriorSpec,
    pub chain: GibbsOptions,
    pub hpd: bool,
}

/// What to compute beyond the two point estimates and their asymptotic
/// intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub gamma: f64,
    pub mle: MleOptions,
    /// Bootstrap resamples; zero skips the bootstrap.
    pub nboot: usize,
    pub boot_seed: u64,
    pub recensor: bool,
    pub bayes: Vec<BayesRequest>,
}

impl AnalysisOptions {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            mle: MleOptions::default(),
            nboot: 0,
            boot_seed: 0,
            recensor: true,
            bayes: Vec::new(),
        }
    }
}

/// MLE, AMLE, their asymptotic intervals, and whatever bootstrap and Bayes
/// summaries `opts` asks for.
pub fn analyze(label: impl Into<String>, data: &PairedData, opts: &AnalysisOptions) -> Result<EstimateReport> {
    let mle = solve_alpha_fixed_point(data, &opts.mle)?;
    let amle = amle_fit(data)?;
    let mut intervals = vec![
        LabeledInterval {
            estimator: "MLE".into(),
            interval: asymptotic_ci(&mle.params(), data, opts.gamma)?,
        },
        LabeledInterval {
            estimator: "AMLE".into(),
            interval: asymptotic_ci(&amle.params(), data, opts.gamma)?,
        },
    ];
    if opts.nboot > 0 {
        let b = bootstrap(
            data,
            &BootstrapOptions {
                nboot: opts.nboot,
                gamma: opts.gamma,
                seed: opts.boot_seed,
                recensor: opts.recensor,
            },
        )?;
        intervals.push(LabeledInterval {
            estimator: "MLE".into(),
            interval: b.boot_p,
        });
        intervals.push(LabeledInterval {
            estimator: "MLE".into(),
            interval: b.boot_t,
        });
    }
    let mut bayes = Vec::new();
    for req in &opts.bayes {
        bayes.push(bayes_report(data, req, opts.gamma)?);
    }
    Ok(EstimateReport {
        label: label.into(),
        mle,
        amle,
        intervals,
        bayes,
    })
}

pub fn bayes_report(data: &PairedData, req: &BayesRequest, gamma: f64) -> Result<BayesReport> {
    let chain = gibbs_chain(data, &req.prior, &req.chain)?;
    let r = chain.r_values();
    let (mean, variance) = posterior_summary(&r)?;
    Ok(BayesReport {
        prior_label: req.prior_label.clone(),
        prior: req.prior,
        mean,
        variance,
        credible: credible_interval(&r, gamma)?,
        hpd: if req.hpd { Some(hpd_interval(&r, gamma)?) } else { None },
        acceptance_rate: chain.acceptance_rate,
        draws: r.len(),
        seed: chain.seed,
    })
}

/// Seeds for the bootstrap and the chain of one analysis, derived from a
/// single user seed.
pub fn analysis_seeds(seed: u64) -> (u64, u64) {
    (derive_seed(seed, &[1]), derive_seed(seed, &[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::apply_scheme;
    use crate::datasets;

    fn data() -> PairedData {
        PairedData::new(
            apply_scheme(&datasets::strength_shifted(), &HybridScheme::new(69, 45, 2.5).unwrap()).unwrap(),
            apply_scheme(&datasets::stress_shifted(), &HybridScheme::new(63, 40, 2.5).unwrap()).unwrap(),
        )
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut opts = AnalysisOptions::new(0.05);
        opts.nboot = 30;
        opts.boot_seed = 4;
        let mut chain = GibbsOptions::new(5);
        chain.m = 200;
        chain.burn_in = 20;
        opts.bayes.push(BayesRequest {
            prior_label: "prior1".into(),
            prior: PriorSpec::prior1(),
            chain,
            hpd: true,
        });
        let report = analyze("scheme", &data(), &opts).unwrap();
        assert_eq!(report.intervals.len(), 4);
        let text = serde_json::to_string(&report).unwrap();
        let back: EstimateReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        // every printed number parses back to the stored value
        let rendered = report.render_text();
        assert!(rendered.contains(&report.mle.r.to_string()));
        assert!(rendered.contains(&report.bayes[0].credible.upper.to_string()));
    }

    #[test]
    fn manifest_records_version() {
        let mut m = RunManifest::new("fit");
        m.schemes.push(HybridScheme::type_ii(5, 3).unwrap());
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.version, env!("CARGO_PKG_VERSION"));
    }
}
