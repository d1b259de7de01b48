//! GLM-versus-point-process convergence experiments on the deterministic design.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::{generate_design_sample, DesignSpec};
use crate::deformed::LinkFamily;
use crate::glm::{fit_glm, BinaryDataset};
use crate::ppp::{fit_additive_smoothing_counts, CovariateDistribution, EventSample, FitOptions, PenalizedObjective};
use crate::{Error, Result};

/// Which covariates form the empirical base measure `F` of the point-process fit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseMeasure {
    /// All `m` covariates (controls and positives).
    #[default]
    AllCovariates,
    /// The `m - n` controls only; the events then sit outside the support of `F`.
    ControlsOnly,
}

impl FromStr for BaseMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" | "all-covariates" => Ok(BaseMeasure::AllCovariates),
            "controls" | "controls-only" => Ok(BaseMeasure::ControlsOnly),
            other => Err(Error::invalid_arg(format!("unknown base measure `{other}` (expected `all` or `controls`)"))),
        }
    }
}

/// One cell of the report: a normalized estimate or the reason it is missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Estimate {
    Fitted { alpha: f64, beta: f64 },
    Failed { error: String },
}

impl Estimate {
    pub fn values(&self) -> Option<(f64, f64)> {
        match *self {
            Estimate::Fitted { alpha, beta } => Some((alpha, beta)),
            Estimate::Failed { .. } => None,
        }
    }

    fn from_result(r: Result<(f64, f64)>) -> Self {
        match r {
            Ok((alpha, beta)) => Estimate::Fitted { alpha, beta },
            Err(e) => Estimate::Failed { error: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub poisson: Estimate,
    /// One entry per link, in the report's link order.
    pub glm: Vec<Estimate>,
}

impl ConvergenceRow {
    /// `max(|alpha_glm - alpha_pp|, |beta_glm - beta_pp|)` for link `i`.
    pub fn gap(&self, i: usize) -> Option<f64> {
        let (a0, b0) = self.poisson.values()?;
        let (a, b) = self.glm[i].values()?;
        Some((a - a0).abs().max((b - b0).abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub q: f64,
    pub n: usize,
    pub kappa: f64,
    pub base_measure: BaseMeasure,
    pub links: Vec<LinkFamily>,
    /// Ordered by increasing `m`.
    pub rows: Vec<ConvergenceRow>,
}

/// Conventional name of the link function for a family.
pub fn link_label(family: &LinkFamily) -> String {
    match family {
        LinkFamily::Logistic => "logit".into(),
        LinkFamily::GumbelMin => "cloglog".into(),
        LinkFamily::Normal => "probit".into(),
        LinkFamily::Cauchy => "cauchit".into(),
        other => other.tag(),
    }
}

fn m_label(m: usize) -> String {
    let mut k = 0;
    let mut v = m;
    while v >= 10 && v.is_multiple_of(10) {
        v /= 10;
        k += 1;
    }
    if v == 1 && k > 0 {
        format!("10^{k}")
    } else {
        m.to_string()
    }
}

impl ConvergenceReport {
    /// CSV with `alpha`, `beta` and gap columns per link; failed cells are empty
    /// and explained in the `notes` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,poisson_alpha,poisson_beta");
        for l in &self.links {
            let name = link_label(l);
            write!(out, ",{name}_alpha,{name}_beta,{name}_gap").unwrap();
        }
        out.push_str(",notes\n");
        for row in &self.rows {
            let mut notes = Vec::new();
            write!(out, "{}", row.m).unwrap();
            let mut cell = |label: String, e: &Estimate, out: &mut String| match e {
                Estimate::Fitted { alpha, beta } => write!(out, ",{alpha},{beta}").unwrap(),
                Estimate::Failed { error } => {
                    out.push_str(",,");
                    notes.push(format!("{label}: {error}"));
                }
            };
            cell("poisson".into(), &row.poisson, &mut out);
            for (i, l) in self.links.iter().enumerate() {
                cell(link_label(l), &row.glm[i], &mut out);
                match row.gap(i) {
                    Some(g) => write!(out, ",{g}").unwrap(),
                    None => out.push(','),
                }
            }
            let joined = notes.join("; ").replace('"', "'");
            if joined.is_empty() {
                out.push_str(",\n");
            } else {
                writeln!(out, ",\"{joined}\"").unwrap();
            }
        }
        out
    }

    /// Aligned text table with four decimals, one `alpha beta` pair per cell.
    pub fn to_text_table(&self) -> String {
        const W: usize = 17;
        let mut out = String::new();
        writeln!(
            out,
            "q = {}, n = {}, kappa = {}, base measure: {}",
            self.q,
            self.n,
            self.kappa,
            match self.base_measure {
                BaseMeasure::AllCovariates => "all covariates",
                BaseMeasure::ControlsOnly => "controls only",
            }
        )
        .unwrap();
        write!(out, "{:<8}{:<W$}", "m", "Poisson process").unwrap();
        for l in &self.links {
            write!(out, "{:<W$}", link_label(l)).unwrap();
        }
        out.push('\n');
        write!(out, "{:<8}{:<W$}", "", "alpha  beta").unwrap();
        for _ in &self.links {
            write!(out, "{:<W$}", "alpha  beta").unwrap();
        }
        out.push('\n');
        let fmt = |e: &Estimate| match e {
            Estimate::Fitted { alpha, beta } => format!("{alpha:.4} {beta:.4}"),
            Estimate::Failed { .. } => "diverged".to_string(),
        };
        for row in &self.rows {
            write!(out, "{:<8}{:<W$}", m_label(row.m), fmt(&row.poisson)).unwrap();
            for e in &row.glm {
                write!(out, "{:<W$}", fmt(e)).unwrap();
            }
            let trimmed = out.trim_end_matches(' ').len();
            out.truncate(trimmed);
            out.push('\n');
        }
        out
    }
}

/// Point-process estimate on the design, with `F` chosen by `base`.
pub fn fit_design_point_process(data: &BinaryDataset, q: f64, kappa: f64, base: BaseMeasure) -> Result<(f64, f64)> {
    let events = EventSample::positives(data);
    match base {
        BaseMeasure::AllCovariates => {
            let dist = CovariateDistribution::from_dataset(data)?;
            let counts = events.counts(&dist)?;
            let fit = fit_additive_smoothing_counts(q, &dist, &counts, kappa, &FitOptions::default())?;
            Ok((fit.alpha(), fit.beta()[0]))
        }
        BaseMeasure::ControlsOnly => {
            let dist = CovariateDistribution::empirical(data.rows_with_label(false))?;
            let p = dist.dim();
            // base-measure points followed by the event points (zero base weight)
            let mut points: Vec<f64> = dist.points().flatten().copied().collect();
            let mut base_w = dist.weights().to_vec();
            let mut log_w: Vec<f64> = base_w.iter().map(|w| kappa * w).collect();
            for i in 0..events.len() {
                match dist.locate(events.point(i)) {
                    Some(j) => log_w[j] += 1.0,
                    None => {
                        points.extend_from_slice(events.point(i));
                        base_w.push(0.0);
                        log_w.push(1.0);
                    }
                }
            }
            let obj = PenalizedObjective::from_parts(q, p, points, base_w, log_w);
            let best = crate::ppp::maximize_penalized(&obj, q, kappa, &FitOptions::default())?;
            Ok((best.x[0], best.x[1]))
        }
    }
}

/// For each `m`, builds the design, fits the point-process model and every
/// GLM, and reports the estimates on the normalized scale.
pub fn run_convergence_experiment(
    q: f64,
    links: &[LinkFamily],
    n: usize,
    m_list: &[usize],
    kappa: f64,
    base: BaseMeasure,
) -> Result<ConvergenceReport> {
    if m_list.is_empty() {
        return Err(Error::invalid_arg("m list is empty"));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid_arg("m list must be strictly increasing"));
    }
    if let Some(l) = links.iter().find(|l| l.tail_index() != q) {
        return Err(Error::invalid_arg(format!("link {l} has tail index {}, not q = {q}", l.tail_index())));
    }
    let specs = m_list
        .iter()
        .map(|&m| DesignSpec::new(n, m))
        .collect::<Result<Vec<_>>>()?;

    let rows = specs
        .par_iter()
        .map(|&spec| -> Result<ConvergenceRow> {
            let data = generate_design_sample(spec)?;
            let poisson = Estimate::from_result(fit_design_point_process(&data, q, kappa, base));
            let glm = links
                .par_iter()
                .map(|link| {
                    Estimate::from_result(fit_glm(&data, link, Some(kappa)).and_then(|fit| {
                        let norm = fit.normalized(spec.m as u64)?;
                        Ok((norm.alpha, norm.beta[0]))
                    }))
                })
                .collect();
            Ok(ConvergenceRow { m: spec.m, poisson, glm })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceReport {
        q,
        n,
        kappa,
        base_measure: base,
        links: links.to_vec(),
        rows,
    })
}
