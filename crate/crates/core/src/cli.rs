//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::{
    credible_interval, gibbs_chain, hpd_interval, posterior_summary, GibbsOptions, PriorSpec, ScanOrder,
};
use crate::censoring::{apply_scheme, HybridSample, HybridScheme, PairedData};
use crate::error::Error;
use crate::harness::{
    case_study_schemes, casestudy, run_table, write_outputs, CaseStudyOptions, ChainConfig, ExperimentConfig,
};
use crate::report::{analysis_seeds, analyze, AnalysisOptions, EstimateReport, RunManifest};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  I/O or other failure
  2  input, flag or configuration parse error
  3  fit did not converge
  4  degenerate data (too few failures, flat samples, singular information)
  5  improper posterior
  6  a simulation cell was aborted";

#[derive(Debug, Parser)]
#[command(name = "stress-strength", version, about = "Estimate P(X > Y) for Weibull strength and stress from hybrid censored samples", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MLE, approximate MLE and confidence intervals for two samples.
    Fit(FitArgs),
    /// Posterior summary and draws from the Gibbs sampler.
    Bayes(BayesArgs),
    /// Monte Carlo table over a grid of censoring schemes.
    Table(TableArgs),
    /// The built-in carbon fibre example.
    Casestudy(CaseArgs),
}

/// `r,T` with `T` a positive number or `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeArg {
    pub r: usize,
    pub time_limit: f64,
}

fn parse_scheme(s: &str) -> Result<SchemeArg, String> {
    let (r, t) = s.split_once(',').ok_or_else(|| format!("expected r,T but got {s:?}"))?;
    let r = r.trim().parse::<usize>().map_err(|e| format!("bad r in {s:?}: {e}"))?;
    let t = match t.trim() {
        "inf" | "Inf" | "INF" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|e| format!("bad T in {s:?}: {e}"))?,
    };
    Ok(SchemeArg { r, time_limit: t })
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Strength sample: one lifetime per line, `#` starts a comment.
    #[arg(long)]
    pub x: PathBuf,
    /// Stress sample, same format.
    #[arg(long)]
    pub y: PathBuf,
    /// Censoring plan `r,T` for the strength sample (default: complete).
    #[arg(long, value_parser = parse_scheme)]
    pub scheme1: Option<SchemeArg>,
    /// Censoring plan `r,T` for the stress sample (default: complete).
    #[arg(long, value_parser = parse_scheme)]
    pub scheme2: Option<SchemeArg>,
    /// Added to every value before censoring.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    /// Convergence tolerance on successive shape iterates.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration budget of the shape solver.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Bootstrap resamples for Boot-p and Boot-t; 0 skips them.
    #[arg(long, default_value_t = 0)]
    pub boot: usize,
    /// Keep the censoring plan active on bootstrap resamples.
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub boot_recensor: OnOff,
    /// Seed for the bootstrap; generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the report and manifest as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    Printed,
    Systematic,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Preset hyperparameters: 1 = all zero, 2 = a = 1, b = 2.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub prior: u8,
    /// Override individual hyperparameters as `a1,b1,a2,b2,a3,b3`.
    #[arg(long)]
    pub hyper: Option<String>,
    /// Stored draws.
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1.0)]
    pub proposal_sd: f64,
    #[arg(long, value_enum, default_value_t = ScanArg::Printed)]
    pub scan: ScanArg,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    /// Also report the shortest (HPD) interval.
    #[arg(long)]
    pub hpd: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the draws as CSV (sweep, alpha, theta1, theta2, r).
    #[arg(long)]
    pub draws: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Experiment configuration (TOML). Defaults to the built-in grid.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "table-out")]
    pub out: PathBuf,
    /// Only run the first K cells.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Override the replication count.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Run 1000 replications per cell.
    #[arg(long, conflicts_with = "replications")]
    pub full: bool,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub no_bayes: bool,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub scheme: u8,
    #[arg(long, default_value_t = 250)]
    pub nboot: usize,
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burnin: usize,
    #[arg(long)]
    pub hpd: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Failure of a CLI command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::SizeMismatch { .. } | Error::Config(_) => 2,
                Error::NonConvergence { .. } | Error::NegativeDiscriminant(_) | Error::NonpositiveSigma(_) => 3,
                Error::ZeroFailures
                | Error::DegenerateData(_)
                | Error::SingularInformation
                | Error::InformationNotPositiveDefinite(_)
                | Error::NonpositiveVariance(_)
                | Error::TooManyFailedResamples { .. } => 4,
                Error::ImproperPosterior(_) => 5,
                Error::CellAborted { .. } => 6,
                Error::EmptyChain | Error::InsufficientDraws { .. } => 1,
            },
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Contents of one sample file.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleFile {
    /// Complete lifetimes, censored later by a command-line plan.
    Raw(Vec<f64>),
    /// Observed failures under a plan stated in the file with a
    /// `censored: n,r,T` line.
    Censored { scheme: HybridScheme, times: Vec<f64> },
}

/// Parse the sample file format. Errors name the offending line.
pub fn parse_sample(text: &str, origin: &str) -> Result<SampleFile, CliError> {
    let mut values = Vec::new();
    let mut scheme = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("censored:") {
            if scheme.is_some() || !values.is_empty() {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: the censored: header must come before any value"
                )));
            }
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            let [n, r, t] = parts[..] else {
                return Err(CliError::Parse(format!("{origin}:{lineno}: expected censored: n,r,T")));
            };
            let n = n
                .parse::<usize>()
                .map_err(|e| CliError::Parse(format!("{origin}:{lineno}: bad n: {e}")))?;
            let arg =
                parse_scheme(&format!("{r},{t}")).map_err(|e| CliError::Parse(format!("{origin}:{lineno}: {e}")))?;
            scheme = Some(
                HybridScheme::new(n, arg.r, arg.time_limit)
                    .map_err(|e| CliError::Parse(format!("{origin}:{lineno}: {e}")))?,
            );
            continue;
        }
        let v: f64 = content
            .parse()
            .map_err(|_| CliError::Parse(format!("{origin}:{lineno}: not a number: {content:?}")))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!("{origin}:{lineno}: value must be finite")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Parse(format!("{origin}: no values")));
    }
    Ok(match scheme {
        Some(scheme) => SampleFile::Censored { scheme, times: values },
        None => SampleFile::Raw(values),
    })
}

fn load_sample(path: &Path, plan: Option<SchemeArg>, shift: f64) -> Result<HybridSample, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    match parse_sample(&text, &path.display().to_string())? {
        SampleFile::Raw(values) => {
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let scheme = match plan {
                Some(p) => HybridScheme::new(shifted.len(), p.r, p.time_limit)?,
                None => HybridScheme::complete(shifted.len())?,
            };
            Ok(apply_scheme(&shifted, &scheme)?)
        }
        SampleFile::Censored { scheme, times } => {
            if plan.is_some() {
                return Err(CliError::Parse(format!(
                    "{}: file already states its censoring plan; drop the --scheme flag",
                    path.display()
                )));
            }
            let shifted: Vec<f64> = times.iter().map(|v| v + shift).collect();
            Ok(HybridSample::from_observed(scheme, shifted)?)
        }
    }
}

fn load_data(args: &DataArgs) -> Result<PairedData, CliError> {
    Ok(PairedData::new(
        load_sample(&args.x, args.scheme1, args.shift)?,
        load_sample(&args.y, args.scheme2, args.shift)?,
    ))
}

fn data_manifest(command: &str, args: &DataArgs, data: &PairedData) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.inputs = vec![args.x.display().to_string(), args.y.display().to_string()];
    m.schemes = vec![*data.x.scheme(), *data.y.scheme()];
    m
}

fn resolve_seed(seed: Option<u64>, err: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        let _ = writeln!(err, "no --seed given; using seed {s}");
        s
    })
}

#[derive(Serialize)]
struct JsonOut<'a, T: Serialize> {
    manifest: &'a RunManifest,
    report: &'a T,
}

fn write_json<T: Serialize>(path: &Path, manifest: &RunManifest, report: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&JsonOut { manifest, report }).map_err(|e| io_error(path, e))?;
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

fn print_report(out: &mut dyn Write, report: &EstimateReport, manifest: &RunManifest) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    write!(out, "{}", report.render_text()).map_err(io)?;
    writeln!(
        out,
        "manifest: {}",
        serde_json::to_string(manifest).map_err(|e| CliError::Io(e.to_string()))?
    )
    .map_err(io)
}

fn cmd_fit(args: &FitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    let mut manifest = data_manifest("fit", &args.data, &data);
    let mut opts = AnalysisOptions::new(args.gamma);
    opts.mle.tol = args.tol;
    opts.mle.max_iter = args.max_iter;
    if args.boot > 0 {
        let seed = resolve_seed(args.seed, err);
        manifest.seeds.push(seed);
        opts.nboot = args.boot;
        opts.boot_seed = analysis_seeds(seed).0;
        opts.recensor = args.boot_recensor == OnOff::On;
    }
    let report = analyze("fit", &data, &opts)?;
    print_report(out, &report, &manifest)?;
    if let Some(p) = &args.json {
        write_json(p, &manifest, &report)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct BayesSummary {
    prior: PriorSpec,
    mean: f64,
    variance: f64,
    acceptance_rate: f64,
    draws: usize,
    burn_in: usize,
    credible: Option<crate::intervals::Interval>,
    hpd: Option<crate::intervals::Interval>,
}

fn parse_hyper(s: &str) -> Result<PriorSpec, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Parse(format!("--hyper: {e}")))?;
    let [a1, b1, a2, b2, a3, b3] = v[..] else {
        return Err(CliError::Parse("--hyper expects six values a1,b1,a2,b2,a3,b3".into()));
    };
    Ok(PriorSpec::new(a1, b1, a2, b2, a3, b3)?)
}

fn cmd_bayes(args: &BayesArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let data = match load_data(&args.data) {
        Err(CliError::Core(Error::ZeroFailures)) => {
            return Err(Error::ImproperPosterior("a sample has no observed failure".into()).into())
        }
        other => other?,
    };
    let prior = match &args.hyper {
        Some(h) => parse_hyper(h)?,
        None if args.prior == 2 => PriorSpec::prior2(),
        None => PriorSpec::prior1(),
    };
    let seed = resolve_seed(args.seed, err);
    let mut manifest = data_manifest("bayes", &args.data, &data);
    manifest.seeds.push(seed);
    let chain = gibbs_chain(
        &data,
        &prior,
        &GibbsOptions {
            m: args.m,
            burn_in: args.burnin,
            proposal_sd: args.proposal_sd,
            init: None,
            seed,
            scan: match args.scan {
                ScanArg::Printed => ScanOrder::Printed,
                ScanArg::Systematic => ScanOrder::Systematic,
            },
        },
    )?;
    let r = chain.r_values();
    let (mean, variance) = posterior_summary(&r)?;
    let interval = |res: crate::error::Result<crate::intervals::Interval>, what: &str, err: &mut dyn Write| match res {
        Ok(i) => Ok(Some(i)),
        Err(e @ Error::InsufficientDraws { .. }) => {
            let _ = writeln!(err, "{what} interval skipped: {e}");
            Ok(None)
        }
        Err(e) => Err(CliError::Core(e)),
    };
    let credible = interval(credible_interval(&r, args.gamma), "credible", err)?;
    let hpd = if args.hpd {
        interval(hpd_interval(&r, args.gamma), "hpd", err)?
    } else {
        None
    };
    let summary = BayesSummary {
        prior,
        mean,
        variance,
        acceptance_rate: chain.acceptance_rate,
        draws: r.len(),
        burn_in: chain.burn_in,
        credible,
        hpd,
    };

    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(
        out,
        "Bayes  R = {mean}  var = {variance}  acceptance = {}",
        chain.acceptance_rate
    )
    .map_err(io)?;
    writeln!(out, "draws = {}  burn-in = {}", r.len(), chain.burn_in).map_err(io)?;
    for i in [credible, hpd].into_iter().flatten() {
        writeln!(
            out,
            "{:<10} {}%  ({}, {})",
            i.method.label(),
            i.level * 100.0,
            i.lower,
            i.upper
        )
        .map_err(io)?;
    }
    writeln!(
        out,
        "manifest: {}",
        serde_json::to_string(&manifest).map_err(|e| CliError::Io(e.to_string()))?
    )
    .map_err(io)?;

    if let Some(p) = &args.draws {
        let f = fs::File::create(p).map_err(|e| io_error(p, e))?;
        chain
            .write_csv(std::io::BufWriter::new(f))
            .map_err(|e| io_error(p, e))?;
        let side = sidecar(p);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_error(&side, e))?;
        fs::write(&side, text).map_err(|e| io_error(&side, e))?;
    }
    if let Some(p) = &args.json {
        write_json(p, &manifest, &summary)?;
    }
    Ok(())
}

const BUILTIN_TABLE: &str = include_str!("../data/table1.cfg");

fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::from_toml(BUILTIN_TABLE)?,
    };
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if args.full {
        cfg.replications = 1000;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    cfg.run_bootstrap &= !args.no_bootstrap;
    cfg.run_bayes &= !args.no_bayes;
    cfg.validate()?;

    let results = run_table(&cfg, args.cells)?;
    let mut manifest = RunManifest::new("table");
    manifest.inputs = args.config.iter().map(|p| p.display().to_string()).collect();
    if manifest.inputs.is_empty() {
        manifest.inputs.push("<built-in table1.cfg>".into());
    }
    manifest.schemes = results.iter().flat_map(|c| [c.scheme_x, c.scheme_y]).collect();
    manifest.seeds.push(cfg.master_seed);
    write_outputs(&args.out, &results, &manifest)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    write!(out, "{}", crate::harness::render_table(&results)).map_err(io)?;
    writeln!(out, "wrote {}", args.out.display()).map_err(io)
}

fn cmd_casestudy(args: &CaseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed, err);
    let mut opts = CaseStudyOptions::new(seed);
    opts.nboot = args.nboot;
    opts.chain = ChainConfig {
        m: args.m,
        burn_in: args.burnin,
        ..ChainConfig::default()
    };
    opts.hpd = args.hpd;
    let report = casestudy(args.scheme, &opts)?;
    let mut manifest = RunManifest::new(format!("casestudy --scheme {}", args.scheme));
    manifest.inputs.push("<built-in gauge data, shifted by -0.75>".into());
    let (sx, sy) = case_study_schemes(args.scheme)?;
    manifest.schemes = vec![sx, sy];
    manifest.seeds.push(seed);
    print_report(out, &report, &manifest)?;
    if let Some(p) = &args.json {
        write_json(p, &manifest, &report)?;
    }
    Ok(())
}

/// Run the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, out, err),
        Command::Bayes(a) => cmd_bayes(a, out, err),
        Command::Table(a) => cmd_table(a, out),
        Command::Casestudy(a) => cmd_casestudy(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
