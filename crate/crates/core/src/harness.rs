//! Monte Carlo experiments over a grid of censoring schemes, and the two
//! fixed case-study analyses of the gauge data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amle::amle_fit;
use crate::bayes::{credible_interval, gibbs_chain, posterior_summary, GibbsOptions, PriorSpec, ScanOrder};
use crate::censoring::{apply_scheme, generate_hybrid_sample, HybridScheme, PairedData};
use crate::datasets;
use crate::dist::WeibullParams;
use crate::error::{Error, Result};
use crate::intervals::{
    asymptotic_ci, bootstrap, delta_variance, delta_variance_generic, observed_information, BootstrapOptions,
};
use crate::mle::fit_mle;
use crate::report::{analysis_seeds, analyze, AnalysisOptions, BayesRequest, EstimateReport, RunManifest};
use crate::rng::{derive_seed, rng_from_seed};

/// A prior with the name used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPrior {
    pub name: String,
    #[serde(flatten)]
    pub prior: PriorSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub m: usize,
    pub burn_in: usize,
    pub proposal_sd: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            m: 10_000,
            burn_in: 1_000,
            proposal_sd: 1.0,
        }
    }
}

fn default_replications() -> usize {
    500
}
fn default_nboot() -> usize {
    250
}
fn default_gamma() -> f64 {
    0.05
}
fn yes() -> bool {
    true
}

/// Experiment description, usually read from TOML.
///
/// The grid crosses `schemes` with itself: strength scheme outer, stress
/// scheme inner, so cell `5 i + j` pairs `schemes[i]` with `schemes[j]` for a
/// five-scheme list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub true_params: WeibullParams,
    /// `(r, T)` pairs.
    pub schemes: Vec<(usize, f64)>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_nboot")]
    pub nboot: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub priors: Vec<NamedPrior>,
    #[serde(default = "yes")]
    pub run_bootstrap: bool,
    #[serde(default = "yes")]
    pub run_bayes: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("scheme list is empty".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.run_bootstrap && self.nboot < 2 {
            return bad("nboot must be at least 2".into());
        }
        WeibullParams::new(self.true_params.alpha, self.true_params.theta1, self.true_params.theta2)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.grid()?;
        Ok(())
    }

    /// `(strength scheme, stress scheme)` for every cell.
    pub fn grid(&self) -> Result<Vec<(HybridScheme, HybridScheme)>> {
        let mut cells = Vec::with_capacity(self.schemes.len() * self.schemes.len());
        for &(r1, t1) in &self.schemes {
            for &(r2, t2) in &self.schemes {
                let x = HybridScheme::new(self.n, r1, t1).map_err(|e| Error::Config(e.to_string()))?;
                let y = HybridScheme::new(self.m, r2, t2).map_err(|e| Error::Config(e.to_string()))?;
                cells.push((x, y));
            }
        }
        Ok(cells)
    }

    fn gibbs(&self, seed: u64) -> GibbsOptions {
        GibbsOptions {
            m: self.chain.m,
            burn_in: self.chain.burn_in,
            proposal_sd: self.chain.proposal_sd,
            init: None,
            seed,
            scan: ScanOrder::Printed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub average_estimate: f64,
    pub bias: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub method: String,
    pub average_length: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: usize,
    pub scheme_x: HybridScheme,
    pub scheme_y: HybridScheme,
    pub estimators: Vec<EstimatorSummary>,
    pub intervals: Vec<IntervalSummary>,
    pub replications: usize,
    pub discarded: usize,
    pub retries: usize,
    /// Largest relative gap between the closed-form and the generic
    /// delta-method variance over all fits in the cell.
    pub max_variance_gap: f64,
}

impl CellResult {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == name)
    }

    pub fn interval(&self, method: &str) -> Option<&IntervalSummary> {
        self.intervals.iter().find(|i| i.method == method)
    }
}

/// Everything measured on one simulated data set.
#[derive(Debug, Clone, PartialEq)]
struct Replication {
    estimates: Vec<(String, f64)>,
    /// `(method, length, covers the true R)`.
    intervals: Vec<(String, f64, bool)>,
    variance_gap: f64,
}

fn estimator_names(cfg: &ExperimentConfig) -> Vec<String> {
    let mut v = vec!["MLE".to_string(), "AMLE".to_string()];
    if cfg.run_bayes {
        v.extend(cfg.priors.iter().map(|p| format!("Bayes-{}", p.name)));
    }
    v
}

fn method_names(cfg: &ExperimentConfig) -> Vec<String> {
    let mut v = vec!["asymptotic".to_string()];
    if cfg.run_bootstrap {
        v.push("boot-p".into());
        v.push("boot-t".into());
    }
    if cfg.run_bayes {
        v.extend(cfg.priors.iter().map(|p| format!("credible-{}", p.name)));
    }
    v
}

fn replicate(cfg: &ExperimentConfig, x: &HybridScheme, y: &HybridScheme, seed: u64) -> Result<Replication> {
    let truth = cfg.true_params;
    let r_true = truth.reliability();
    let mut rng = rng_from_seed(seed);
    let data = PairedData::new(
        generate_hybrid_sample(x, truth.alpha, truth.theta1, &mut rng)?,
        generate_hybrid_sample(y, truth.alpha, truth.theta2, &mut rng)?,
    );
    let mle = fit_mle(&data)?;
    let amle = amle_fit(&data)?;
    let mut estimates = vec![("MLE".to_string(), mle.r), ("AMLE".to_string(), amle.r)];

    let info = observed_information(&mle.params(), &data)?;
    let closed = delta_variance(&mle.params(), &info)?;
    let generic = delta_variance_generic(&mle.params(), &info)?;
    let variance_gap = (closed - generic).abs() / closed;

    let mut intervals = Vec::new();
    let mut push =
        |name: &str, i: crate::intervals::Interval| intervals.push((name.to_string(), i.length(), i.contains(r_true)));
    push("asymptotic", asymptotic_ci(&mle.params(), &data, cfg.gamma)?);
    if cfg.run_bootstrap {
        let b = bootstrap(
            &data,
            &BootstrapOptions::new(cfg.nboot, cfg.gamma, derive_seed(seed, &[1])),
        )?;
        push("boot-p", b.boot_p);
        push("boot-t", b.boot_t);
    }
    if cfg.run_bayes {
        for (k, p) in cfg.priors.iter().enumerate() {
            let chain = gibbs_chain(&data, &p.prior, &cfg.gibbs(derive_seed(seed, &[2, k as u64])))?;
            let r = chain.r_values();
            estimates.push((format!("Bayes-{}", p.name), posterior_summary(&r)?.0));
            push(&format!("credible-{}", p.name), credible_interval(&r, cfg.gamma)?);
        }
    }
    Ok(Replication {
        estimates,
        intervals,
        variance_gap,
    })
}

/// Retries with a fresh seed, at most this many times.
pub const MAX_RETRIES: u64 = 3;

/// Simulate one grid cell. Replication `k` of cell `c` uses seeds derived
/// from `(master_seed, c, k, attempt)`, so results do not depend on the
/// number of worker threads.
pub fn run_cell(cfg: &ExperimentConfig, cell: usize) -> Result<CellResult> {
    let grid = cfg.grid()?;
    let (x, y) = *grid
        .get(cell)
        .ok_or_else(|| Error::Config(format!("cell {cell} outside a grid of {}", grid.len())))?;

    let outcomes: Vec<(Option<Replication>, usize)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            for attempt in 0..=MAX_RETRIES {
                let seed = derive_seed(cfg.master_seed, &[cell as u64, rep as u64, attempt]);
                if let Ok(r) = replicate(cfg, &x, &y, seed) {
                    return (Some(r), attempt as usize);
                }
            }
            (None, MAX_RETRIES as usize)
        })
        .collect();

    let discarded = outcomes.iter().filter(|o| o.0.is_none()).count();
    if discarded as f64 > 0.1 * cfg.replications as f64 {
        return Err(Error::CellAborted {
            cell,
            failed: discarded,
            total: cfg.replications,
        });
    }
    let retries = outcomes.iter().map(|o| o.1).sum();
    let reps: Vec<&Replication> = outcomes.iter().filter_map(|o| o.0.as_ref()).collect();
    let used = reps.len() as f64;
    let r_true = cfg.true_params.reliability();

    let estimators = estimator_names(cfg)
        .into_iter()
        .enumerate()
        .map(|(k, name)| {
            let values: Vec<f64> = reps.iter().map(|r| r.estimates[k].1).collect();
            let avg = values.iter().sum::<f64>() / used;
            let mse = values.iter().map(|v| (v - r_true) * (v - r_true)).sum::<f64>() / used;
            EstimatorSummary {
                estimator: name,
                average_estimate: avg,
                bias: avg - r_true,
                mse,
            }
        })
        .collect();
    let intervals = method_names(cfg)
        .into_iter()
        .enumerate()
        .map(|(k, name)| IntervalSummary {
            method: name,
            average_length: reps.iter().map(|r| r.intervals[k].1).sum::<f64>() / used,
            coverage: reps.iter().filter(|r| r.intervals[k].2).count() as f64 / used,
        })
        .collect();
    Ok(CellResult {
        cell,
        scheme_x: x,
        scheme_y: y,
        estimators,
        intervals,
        replications: reps.len(),
        discarded,
        retries,
        max_variance_gap: reps.iter().map(|r| r.variance_gap).fold(0.0, f64::max),
    })
}

/// Run the first `limit` cells of the grid (all of them when `None`).
pub fn run_table(cfg: &ExperimentConfig, limit: Option<usize>) -> Result<Vec<CellResult>> {
    let total = cfg.grid()?.len();
    let cells = limit.map_or(total, |l| l.min(total));
    (0..cells).map(|c| run_cell(cfg, c)).collect()
}

fn scheme_label(s: &HybridScheme) -> String {
    format!("({}, {})", s.r, s.time_limit)
}

/// Fixed-width tables of estimates and interval lengths.
pub fn render_table(results: &[CellResult]) -> String {
    let mut s = String::new();
    let Some(first) = results.first() else {
        return s;
    };
    let _ = write!(s, "{:<12}{:<12}", "strength", "stress");
    for e in &first.estimators {
        let _ = write!(s, "{:>20}{:>10}", format!("{} AE", e.estimator), "MSE");
    }
    s.push('\n');
    for c in results {
        let _ = write!(s, "{:<12}{:<12}", scheme_label(&c.scheme_x), scheme_label(&c.scheme_y));
        for e in &c.estimators {
            let _ = write!(s, "{:>20.4}{:>10.4}", e.average_estimate, e.mse);
        }
        s.push('\n');
    }
    s.push('\n');
    let _ = write!(s, "{:<12}{:<12}", "strength", "stress");
    for i in &first.intervals {
        let _ = write!(s, "{:>24}{:>10}", format!("{} len", i.method), "cover");
    }
    s.push('\n');
    for c in results {
        let _ = write!(s, "{:<12}{:<12}", scheme_label(&c.scheme_x), scheme_label(&c.scheme_y));
        for i in &c.intervals {
            let _ = write!(s, "{:>24.4}{:>10.3}", i.average_length, i.coverage);
        }
        s.push('\n');
    }
    s
}

pub const ESTIMATES_HEADER: [&str; 11] = [
    "cell",
    "r1",
    "t1",
    "r2",
    "t2",
    "estimator",
    "average_estimate",
    "bias",
    "mse",
    "replications",
    "discarded",
];

pub const INTERVALS_HEADER: [&str; 8] = ["cell", "r1", "t1", "r2", "t2", "method", "average_length", "coverage"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn cell_keys(c: &CellResult) -> [String; 5] {
    [
        c.cell.to_string(),
        c.scheme_x.r.to_string(),
        c.scheme_x.time_limit.to_string(),
        c.scheme_y.r.to_string(),
        c.scheme_y.time_limit.to_string(),
    ]
}

/// Write `estimates.csv`, `intervals.csv`, `table.txt` and `summary.json`
/// into `dir`. The manifest goes into `summary.json` and into a
/// `*.manifest.json` sidecar per CSV, so the CSVs themselves only depend on
/// the configuration.
pub fn write_outputs(dir: &Path, results: &[CellResult], manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let path = dir.join("estimates.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(ESTIMATES_HEADER).map_err(|e| io_err(&path, e))?;
    for c in results {
        for e in &c.estimators {
            let mut row: Vec<String> = cell_keys(c).to_vec();
            row.extend([
                e.estimator.clone(),
                e.average_estimate.to_string(),
                e.bias.to_string(),
                e.mse.to_string(),
                c.replications.to_string(),
                c.discarded.to_string(),
            ]);
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let path = dir.join("intervals.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(INTERVALS_HEADER).map_err(|e| io_err(&path, e))?;
    for c in results {
        for i in &c.intervals {
            let mut row: Vec<String> = cell_keys(c).to_vec();
            row.extend([i.method.clone(), i.average_length.to_string(), i.coverage.to_string()]);
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let manifest_json = serde_json::to_string_pretty(manifest).map_err(|e| io_err(dir, e))?;
    for name in ["estimates.manifest.json", "intervals.manifest.json"] {
        let p = dir.join(name);
        fs::write(&p, &manifest_json).map_err(|e| io_err(&p, e))?;
    }
    let p = dir.join("table.txt");
    fs::write(&p, render_table(results)).map_err(|e| io_err(&p, e))?;

    #[derive(Serialize)]
    struct Summary<'a> {
        manifest: &'a RunManifest,
        cells: &'a [CellResult],
    }
    let p = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&Summary {
        manifest,
        cells: results,
    })
    .map_err(|e| io_err(&p, e))?;
    fs::write(&p, json).map_err(|e| io_err(&p, e))?;
    Ok(())
}

/// The two censoring plans applied to the gauge data.
pub fn case_study_schemes(id: u8) -> Result<(HybridScheme, HybridScheme)> {
    let (n, m) = (datasets::GAUGE_20MM.len(), datasets::GAUGE_10MM.len());
    match id {
        1 => Ok((HybridScheme::new(n, 45, 2.5)?, HybridScheme::new(m, 40, 2.5)?)),
        2 => Ok((HybridScheme::new(n, 35, 1.7)?, HybridScheme::new(m, 25, 2.2)?)),
        _ => Err(Error::Config(format!(
            "unknown case-study scheme {id}; expected 1 or 2"
        ))),
    }
}

/// Shifted gauge data censored by plan `id`.
pub fn case_study_data(id: u8) -> Result<PairedData> {
    let (sx, sy) = case_study_schemes(id)?;
    Ok(PairedData::new(
        apply_scheme(&datasets::strength_shifted(), &sx)?,
        apply_scheme(&datasets::stress_shifted(), &sy)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyOptions {
    pub gamma: f64,
    pub nboot: usize,
    pub seed: u64,
    pub chain: ChainConfig,
    pub hpd: bool,
}

impl CaseStudyOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            gamma: 0.05,
            nboot: 250,
            seed,
            chain: ChainConfig::default(),
            hpd: false,
        }
    }
}

/// MLE, AMLE, asymptotic and bootstrap intervals, and the Bayes estimate
/// under the non-informative prior, for case-study plan `id`.
pub fn casestudy(id: u8, opts: &CaseStudyOptions) -> Result<EstimateReport> {
    let data = case_study_data(id)?;
    let (boot_seed, chain_seed) = analysis_seeds(opts.seed);
    let analysis = AnalysisOptions {
        gamma: opts.gamma,
        mle: Default::default(),
        nboot: opts.nboot,
        boot_seed,
        recensor: true,
        bayes: vec![BayesRequest {
            prior_label: "prior1".into(),
            prior: PriorSpec::prior1(),
            chain: GibbsOptions {
                m: opts.chain.m,
                burn_in: opts.chain.burn_in,
                proposal_sd: opts.chain.proposal_sd,
                init: None,
                seed: chain_seed,
                scan: ScanOrder::Printed,
            },
            hpd: opts.hpd,
        }],
    };
    analyze(format!("case study, scheme {id}"), &data, &analysis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
            n = 30
            m = 30
            schemes = [[20, 1.0], [30, 2.0]]
            replications = 40
            nboot = 20
            master_seed = 77
            true_params = { alpha = 1.5, theta1 = 1.0, theta2 = 1.0 }
            chain = { m = 200, burn_in = 50, proposal_sd = 1.0 }

            [[priors]]
            name = "prior2"
            a1 = 1.0
            b1 = 2.0
            a2 = 1.0
            b2 = 2.0
            a3 = 1.0
            b3 = 2.0
            "#,
        )
        .unwrap()
    }

    #[test]
    fn shipped_config_parses_to_the_full_grid() {
        let cfg = ExperimentConfig::from_toml(include_str!("../data/table1.cfg")).unwrap();
        let grid = cfg.grid().unwrap();
        assert_eq!(grid.len(), 25);
        assert_eq!((grid[0].0.r, grid[0].0.time_limit), (20, 1.0));
        assert_eq!((grid[1].1.r, grid[1].1.time_limit), (25, 1.0));
        assert_eq!((grid[24].0.r, grid[24].1.r), (30, 30));
        assert_eq!(estimator_names(&cfg).len(), 4);
        assert_eq!(cfg.replications, 500);
        assert_eq!(cfg.nboot, 250);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("n = 30").is_err());
        let mut cfg = small_config();
        cfg.replications = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.schemes.push((40, 1.0));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cell_result_shape_and_bands() {
        let cfg = small_config();
        let c = run_cell(&cfg, 3).unwrap();
        assert_eq!(c.estimators.len(), 3);
        assert_eq!(c.intervals.len(), 4);
        assert_eq!(c.replications + c.discarded, 40);
        for e in &c.estimators {
            assert!(e.mse >= 0.0);
            assert!((0.4..0.6).contains(&e.average_estimate), "{e:?}");
        }
        for i in &c.intervals {
            assert!((0.0..=1.0).contains(&i.coverage));
            assert!(i.average_length > 0.0);
        }
        assert!(c.max_variance_gap < 1e-10);
    }

    #[test]
    fn table_is_deterministic_across_thread_counts() {
        let mut cfg = small_config();
        cfg.replications = 12;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_table(&cfg, None)).unwrap();
        let b = four.install(|| run_table(&cfg, None)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert_eq!(run_table(&cfg, Some(1)).unwrap(), vec![a[0].clone()]);
    }

    #[test]
    fn outputs_are_written() {
        let mut cfg = small_config();
        cfg.replications = 5;
        cfg.run_bayes = false;
        cfg.run_bootstrap = false;
        let results = run_table(&cfg, Some(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(dir.path(), &results, &RunManifest::new("table")).unwrap();
        let est = fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
        assert_eq!(est.lines().next().unwrap(), ESTIMATES_HEADER.join(","));
        assert_eq!(est.lines().count(), 1 + 2 * 2);
        let int = fs::read_to_string(dir.path().join("intervals.csv")).unwrap();
        assert_eq!(int.lines().count(), 1 + 2);
        assert!(dir.path().join("summary.json").exists());
        assert!(dir.path().join("estimates.manifest.json").exists());
        assert_eq!(render_table(&results).lines().count(), 2 * (1 + 2) + 1);
    }

    #[test]
    fn case_study_plans() {
        let d1 = case_study_data(1).unwrap();
        assert_eq!((d1.x.d(), d1.y.d()), (45, 40));
        let d2 = case_study_data(2).unwrap();
        assert_eq!(d2.x.d(), 34);
        assert!(case_study_data(3).is_err());
    }
}
