//! The `imbal` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 data error,
//! 4 divergence of a fit (fit commands only).

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::ExperimentConfig;
use config::{check_increasing, check_kappa};

use crate::deformed::{normalizing_sequence, verify_gev, GevResidual, LinkFamily};
use crate::glm::{fit_glm, BinaryDataset};
use crate::io::write_atomic;
use crate::ppp::{fit_additive_smoothing, CovariateDistribution, EventSample};
use crate::simlab::{run_convergence_experiment, simulate_imbalanced, verify_poisson_limit, BaseMeasure, RegionPartition};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_divergence() {
            EXIT_DIVERGENCE
        } else if e.is_data_error() {
            EXIT_DATA
        } else {
            EXIT_CONFIG
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "imbal", version, about = "Binomial regression under imbalanced asymptotics and its Poisson point-process limit")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce a GLM-versus-point-process convergence table.
    Table(TableArgs),
    /// Fit a binomial regression model to a CSV dataset.
    FitGlm(FitGlmArgs),
    /// Fit the additive-smoothing point-process estimator.
    FitPpp(FitPppArgs),
    /// Numerical checks of the limit theorems.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Simulate a dataset from the imbalanced binomial model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Residuals of the extreme-value approximation `m G(c_m + d_m z) - exp_q(z)`.
    Gev(GevArgs),
    /// Monte Carlo comparison of positive counts with their Poisson limit.
    Poisson(PoissonArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// `table1` (q = 1; logit, probit, cloglog) or `table2` (q = 2; cauchit).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Comma-separated link tags.
    #[arg(long = "link", visible_alias = "links", value_delimiter = ',')]
    pub links: Option<Vec<String>>,
    /// Comma-separated sample sizes, e.g. `1e2,1e3`.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub m: Option<Vec<u64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// `all` (every covariate) or `controls` (negatives only).
    #[arg(long)]
    pub base_measure: Option<String>,
    /// Output stem: writes `<out>.csv` and `<out>.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitGlmArgs {
    /// CSV with a `y` column and covariate columns.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub link: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitPppArgs {
    /// CSV with covariate columns and a `weight` column.
    #[arg(long)]
    pub support: Option<PathBuf>,
    /// Binary dataset: `F` is the empirical distribution of its covariates
    /// and, unless `--events` is given, the events are its positive rows.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// CSV of event points (covariate columns only).
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GevArgs {
    /// Comma-separated link tags.
    #[arg(long = "link", visible_alias = "links", value_delimiter = ',')]
    pub links: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub m: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[arg(long)]
    pub link: Option<String>,
    /// CSV with covariate columns and a `weight` column; default: ten
    /// equally weighted points on `[0, 1]`.
    #[arg(long)]
    pub support: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_count)]
    pub m: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Regions as support-index lists, e.g. `0-4;5,7`; default: two halves.
    #[arg(long)]
    pub regions: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub link: Option<String>,
    #[arg(long)]
    pub support: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_count)]
    pub m: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses a positive integer count, accepting forms such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a nonnegative integer")),
    }
}

pub(crate) fn parse_link(s: &str) -> CliResult<LinkFamily> {
    s.parse::<LinkFamily>().map_err(|e| CliError::config(e.to_string()))
}

fn parse_regions(s: &str, support_len: usize) -> CliResult<RegionPartition> {
    let mut regions = Vec::new();
    for part in s.split(';').filter(|p| !p.trim().is_empty()) {
        let mut idx = Vec::new();
        for item in part.split(',') {
            let item = item.trim();
            let bad = || CliError::config(format!("bad region item `{item}`"));
            if let Some((a, b)) = item.split_once('-') {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                idx.extend(a..=b);
            } else {
                idx.push(item.parse().map_err(|_| bad())?);
            }
        }
        regions.push(idx);
    }
    Ok(RegionPartition::new(regions, support_len)?)
}

fn default_grid() -> CovariateDistribution {
    CovariateDistribution::uniform((0..10).map(|i| vec![i as f64 / 9.0]).collect()).expect("grid is a valid support")
}

fn load_support(path: Option<&PathBuf>) -> CliResult<CovariateDistribution> {
    match path {
        Some(p) => read_input(p, CovariateDistribution::from_csv_path),
        None => Ok(default_grid()),
    }
}

/// Reads an input file; a missing file is a configuration error, bad content a data error.
fn read_input<T>(path: &Path, f: impl FnOnce(&Path) -> crate::Result<T>) -> CliResult<T> {
    if !path.is_file() {
        return Err(CliError::config(format!("input file {} does not exist", path.display())));
    }
    f(path).map_err(|e| match e {
        Error::Io(_) => CliError::config(format!("{}: {e}", path.display())),
        other => {
            let mut ce = CliError::from(other);
            ce.message = format!("{}: {}", path.display(), ce.message);
            ce
        }
    })
}

fn emit(out: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| CliError::config(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::config(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

const TABLE_M: [u64; 4] = [100, 1_000, 10_000, 100_000];

fn cmd_table(a: &TableArgs, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cfg.table;
    let preset = a.preset.clone().or_else(|| c.preset.clone());
    let (mut q, mut links) = match preset.as_deref() {
        Some("table1") => (Some(1.0), Some(vec!["logit".to_string(), "probit".into(), "cloglog".into()])),
        Some("table2") => (Some(2.0), Some(vec!["cauchit".to_string()])),
        Some(other) => return Err(CliError::config(format!("unknown preset `{other}` (expected table1 or table2)"))),
        None => (None, None),
    };
    if let Some(v) = a.q.or(c.q) {
        q = Some(v);
    }
    if let Some(v) = a.links.clone().or_else(|| c.links.clone()) {
        links = Some(v);
    }
    let links = links
        .ok_or_else(|| CliError::config("table needs --preset or --link"))?
        .iter()
        .map(|s| parse_link(s))
        .collect::<CliResult<Vec<_>>>()?;
    let q = match q {
        Some(q) => q,
        None => links[0].tail_index(),
    };
    let m = a.m.clone().or_else(|| c.m.clone()).unwrap_or_else(|| TABLE_M.to_vec());
    check_increasing(&m)?;
    let n = a.n.or(c.n).unwrap_or(10);
    let kappa = a.kappa.or(c.kappa).unwrap_or(0.0);
    check_kappa(kappa)?;
    let base: BaseMeasure = match a.base_measure.as_ref().or(c.base_measure.as_ref()) {
        Some(s) => s.parse()?,
        None => BaseMeasure::default(),
    };
    let m_usize: Vec<usize> = m.iter().map(|&v| v as usize).collect();
    let report = run_convergence_experiment(q, &links, n, &m_usize, kappa, base)?;

    let text = report.to_text_table();
    if let Some(stem) = a.out.as_ref().or(c.out.as_ref()) {
        let stem = match stem.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("txt") => stem.with_extension(""),
            _ => stem.clone(),
        };
        let path = |ext: &str| {
            let mut s = stem.clone().into_os_string();
            s.push(ext);
            PathBuf::from(s)
        };
        emit(Some(&path(".csv")), &report.to_csv(), stdout)?;
        emit(Some(&path(".txt")), &text, stdout)?;
    }
    emit(None, &text, stdout)
}

#[derive(Serialize)]
struct GlmFitJson {
    link: LinkFamily,
    kappa: f64,
    m: usize,
    a: f64,
    b: Vec<f64>,
    alpha: f64,
    beta: Vec<f64>,
    log_likelihood: f64,
    objective: f64,
    converged: bool,
    iterations: usize,
    gradient_norm: f64,
}

fn cmd_fit_glm(a: &FitGlmArgs, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cfg.fit_glm;
    let data_path = a
        .data
        .as_ref()
        .or(c.data.as_ref())
        .ok_or_else(|| CliError::config("fit-glm needs --data"))?;
    let link = parse_link(a.link.as_deref().or(c.link.as_deref()).unwrap_or("logistic"))?;
    let kappa = a.kappa.or(c.kappa).unwrap_or(0.0);
    check_kappa(kappa)?;
    let data = read_input(data_path, BinaryDataset::from_csv_path)?;
    let fit = fit_glm(&data, &link, Some(kappa))?;
    let m = data.len();
    let (alpha, beta) = match normalizing_sequence(&link, m as u64) {
        Ok(t) => {
            let n = crate::glm::normalize_coefficients(&fit.coefficients, &t);
            (n.alpha, n.beta)
        }
        Err(_) => (f64::NAN, vec![f64::NAN; fit.coefficients.b.len()]),
    };
    let json = GlmFitJson {
        link,
        kappa,
        m,
        a: fit.coefficients.a,
        b: fit.coefficients.b.clone(),
        alpha,
        beta,
        log_likelihood: fit.log_likelihood,
        objective: fit.objective,
        converged: fit.converged,
        iterations: fit.iterations,
        gradient_norm: fit.gradient_norm,
    };
    emit(a.out.as_ref().or(c.out.as_ref()), &to_json(&json), stdout)
}

fn cmd_fit_ppp(a: &FitPppArgs, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cfg.fit_ppp;
    let q = a.q.or(c.q).unwrap_or(1.0);
    if !q.is_finite() {
        return Err(CliError::config("q must be finite"));
    }
    let kappa = a.kappa.or(c.kappa).unwrap_or(1.0);
    check_kappa(kappa)?;
    let support = a.support.as_ref().or(c.support.as_ref());
    let data = a.data.as_ref().or(c.data.as_ref());
    let events = a.events.as_ref().or(c.events.as_ref());

    let (dist, sample) = match (support, data) {
        (Some(_), Some(_)) => return Err(CliError::config("give either --support or --data, not both")),
        (Some(s), None) => {
            let dist = read_input(s, CovariateDistribution::from_csv_path)?;
            let sample = match events {
                Some(e) => read_input(e, EventSample::from_csv_path)?,
                None => EventSample::empty(dist.dim()),
            };
            (dist, sample)
        }
        (None, Some(d)) => {
            let ds = read_input(d, BinaryDataset::from_csv_path)?;
            let dist = CovariateDistribution::from_dataset(&ds)?;
            let sample = match events {
                Some(e) => read_input(e, EventSample::from_csv_path)?,
                None => EventSample::positives(&ds),
            };
            (dist, sample)
        }
        (None, None) => return Err(CliError::config("fit-ppp needs --support or --data")),
    };
    let fit = fit_additive_smoothing(q, &dist, &sample, kappa).map_err(|e| {
        let mut ce = CliError::from(e);
        if ce.code == EXIT_DIVERGENCE && kappa == 0.0 {
            ce.message = format!("{}\nwarning: with kappa = 0 the maximum likelihood estimate may not exist; use kappa > 0", ce.message);
        }
        ce
    })?;
    emit(a.out.as_ref().or(c.out.as_ref()), &(fit.to_json() + "\n"), stdout)
}

#[derive(Serialize)]
struct GevJson {
    link: LinkFamily,
    q: f64,
    m: u64,
    c: f64,
    d: f64,
    residuals: Vec<GevResidual>,
}

fn cmd_verify_gev(a: &GevArgs, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cfg.verify_gev;
    let links = a
        .links
        .clone()
        .or_else(|| c.links.clone())
        .unwrap_or_else(|| vec!["logistic".into()])
        .iter()
        .map(|s| parse_link(s))
        .collect::<CliResult<Vec<_>>>()?;
    let ms = a
        .m
        .clone()
        .or_else(|| c.m.clone())
        .unwrap_or_else(|| vec![1_000, 10_000, 100_000, 1_000_000]);
    check_increasing(&ms)?;
    let zs = a.z.clone().or_else(|| c.z.clone()).unwrap_or_else(|| vec![-1.0, -0.5, 0.0, 0.5]);
    let mut results = Vec::new();
    for link in &links {
        for &m in &ms {
            let t = normalizing_sequence(link, m)?;
            results.push(GevJson {
                link: *link,
                q: t.q,
                m,
                c: t.c,
                d: t.d,
                residuals: verify_gev(link, m, &zs)?,
            });
        }
    }
    emit(a.out.as_ref().or(c.out.as_ref()), &to_json(&serde_json::json!({ "results": results })), stdout)
}

fn cmd_verify_poisson(a: &PoissonArgs, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cfg.verify_poisson;
    let link = parse_link(a.link.as_deref().or(c.link.as_deref()).unwrap_or("logistic"))?;
    let dist = load_support(a.support.as_ref().or(c.support.as_ref()))?;
    let alpha = a.alpha.or(c.alpha).unwrap_or(0.0);
    let beta = a.beta.clone().or_else(|| c.beta.clone()).unwrap_or_else(|| vec![0.0; dist.dim()]);
    let m = a.m.or(c.m).unwrap_or(100_000);
    let reps = a.reps.map(|r| r as usize).or(c.replications).unwrap_or(10_000);
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let partition = match (&a.regions, &c.regions) {
        (Some(s), _) => parse_regions(s, dist.len())?,
        (None, Some(r)) => RegionPartition::new(r.clone(), dist.len())?,
        (None, None) => RegionPartition::halves(dist.len())?,
    };
    let report = verify_poisson_limit(&link, &dist, alpha, &beta, &partition, m, reps, seed)?;
    emit(a.out.as_ref().or(c.out.as_ref()), &to_json(&report), stdout)
}

fn cmd_simulate(a: &SimulateArgs, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cfg.simulate;
    let link = parse_link(a.link.as_deref().or(c.link.as_deref()).unwrap_or("logistic"))?;
    let dist = load_support(a.support.as_ref().or(c.support.as_ref()))?;
    let alpha = a.alpha.or(c.alpha).unwrap_or(0.0);
    let beta = a.beta.clone().or_else(|| c.beta.clone()).unwrap_or_else(|| vec![0.0; dist.dim()]);
    let m = a.m.or(c.m).unwrap_or(10_000);
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let data = simulate_imbalanced(&link, &dist, alpha, &beta, m, seed)?;
    emit(a.out.as_ref().or(c.out.as_ref()), &data.to_csv_string(), stdout)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    match &cli.command {
        Command::Table(a) => cmd_table(a, &cfg, stdout),
        Command::FitGlm(a) => cmd_fit_glm(a, &cfg, stdout),
        Command::FitPpp(a) => cmd_fit_ppp(a, &cfg, stdout),
        Command::Verify(VerifyCommand::Gev(a)) => cmd_verify_gev(a, &cfg, stdout),
        Command::Verify(VerifyCommand::Poisson(a)) => cmd_verify_poisson(a, &cfg, stdout),
        Command::Simulate(a) => cmd_simulate(a, &cfg, stdout),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return if code == 0 { EXIT_OK } else { EXIT_CONFIG };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
