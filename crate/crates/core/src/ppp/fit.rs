use serde::Serialize;

use super::distribution::{affine_rank, CovariateDistribution, EventSample};
use super::model::{PenalizedObjective, PointProcessModel};
use crate::error::DivergenceKind;
use crate::glm::sign_pattern_starts;
use crate::optim::{maximize_multistart, NewtonOptions, NewtonResult, Objective, Termination};
use crate::{Error, Result};

/// Margin below which an unpenalized fit is considered to sit on the boundary.
const BOUNDARY_MARGIN: f64 = 1e-8;

/// Parameter norm beyond which an unfinished unpenalized fit is attributed to
/// an unbounded ray.
const UNBOUNDED_NORM: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub newton: NewtonOptions,
    /// Overrides the default start at the origin, which always lies in `Theta`.
    pub start: Option<Vec<f64>>,
    /// For `q` outside `[0, 1]`, also start from perturbed points and keep the best.
    pub multistart: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            newton: NewtonOptions::default(),
            start: None,
            multistart: true,
        }
    }
}

/// The additive-smoothing estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointProcessFit {
    pub model: PointProcessModel,
    pub kappa: f64,
    pub penalized_objective: f64,
    pub total_intensity: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Serialized form of a fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub q: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub total_intensity: f64,
    pub objective: f64,
    pub converged: bool,
}

impl PointProcessFit {
    pub fn alpha(&self) -> f64 {
        self.model.alpha()
    }

    pub fn beta(&self) -> &[f64] {
        self.model.beta()
    }

    pub fn summary(&self) -> FitSummary {
        FitSummary {
            q: self.model.q(),
            kappa: self.kappa,
            alpha: self.model.alpha(),
            beta: self.model.beta().to_vec(),
            total_intensity: self.total_intensity,
            objective: self.penalized_objective,
            converged: self.converged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("fit summary serializes")
    }
}

/// Maximizes the penalized log-likelihood over `Theta` with default options.
pub fn fit_additive_smoothing(
    q: f64,
    dist: &CovariateDistribution,
    sample: &EventSample,
    kappa: f64,
) -> Result<PointProcessFit> {
    fit_additive_smoothing_with(q, dist, sample, kappa, &FitOptions::default())
}

/// As [`fit_additive_smoothing`], from event counts per support point.
pub fn fit_additive_smoothing_counts(
    q: f64,
    dist: &CovariateDistribution,
    counts: &[u64],
    kappa: f64,
    opts: &FitOptions,
) -> Result<PointProcessFit> {
    if !q.is_finite() {
        return Err(Error::invalid_arg(format!("q must be finite, got {q}")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::invalid_arg(format!("kappa must be finite and nonnegative, got {kappa}")));
    }
    if counts.len() != dist.len() {
        return Err(Error::invalid_arg(format!("{} counts for {} support points", counts.len(), dist.len())));
    }
    let n: u64 = counts.iter().sum();
    if kappa == 0.0 && n == 0 {
        return Err(Error::Divergence {
            kind: DivergenceKind::NoData,
            iterations: 0,
        });
    }

    let objective = PenalizedObjective::new(q, dist, counts, kappa);
    let best = maximize_penalized(&objective, q, kappa, opts)?;
    // For q >= 1 the supremum can be approached along a ray on which the
    // gradient decays below tolerance, so the stopping rule alone cannot
    // tell convergence from escape to infinity.
    if kappa == 0.0 && q >= 1.0 && events_on_boundary_face(dist, counts, q, &best.x) {
        return Err(Error::Divergence {
            kind: DivergenceKind::Unbounded,
            iterations: best.iterations,
        });
    }

    let model = PointProcessModel::new(q, dist.clone(), best.x[0], best.x[1..].to_vec())?;
    Ok(PointProcessFit {
        total_intensity: model.total_intensity(),
        model,
        kappa,
        penalized_objective: best.value,
        converged: best.converged(),
        iterations: best.iterations,
        gradient_norm: best.grad_norm,
    })
}

pub fn fit_additive_smoothing_with(
    q: f64,
    dist: &CovariateDistribution,
    sample: &EventSample,
    kappa: f64,
    opts: &FitOptions,
) -> Result<PointProcessFit> {
    let counts = sample.counts(dist)?;
    fit_additive_smoothing_counts(q, dist, &counts, kappa, opts)
}

/// Runs the optimizer from the origin (or `opts.start`), with perturbed
/// restarts for `q` outside `[0, 1]`, and classifies unpenalized runs that
/// fail to produce an interior maximizer as divergent.
pub(crate) fn maximize_penalized(
    objective: &PenalizedObjective<'_>,
    q: f64,
    kappa: f64,
    opts: &FitOptions,
) -> Result<NewtonResult> {
    let k = objective.dim();
    let base = match &opts.start {
        Some(s) if s.len() != k => {
            return Err(Error::invalid_arg(format!("start has {} entries, expected {k}", s.len())));
        }
        Some(s) => s.clone(),
        None => vec![0.0; k],
    };
    let mut starts = vec![base.clone()];
    if opts.multistart && !(0.0..=1.0).contains(&q) {
        starts.extend(
            sign_pattern_starts(&base, 0.5)
                .into_iter()
                .filter(|s| objective.value(s).is_finite()),
        );
    }

    let best = maximize_multistart(objective, &starts, &opts.newton)
        .ok_or_else(|| Error::invalid_arg("no starting point"))?;
    if best.termination == Termination::InfeasibleStart {
        return Err(Error::invalid_arg("starting point is outside the parameter space"));
    }
    if kappa == 0.0 {
        check_termination(q, &best)?;
    }
    Ok(best)
}

fn check_termination(q: f64, res: &NewtonResult) -> Result<()> {
    let norm = res.x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diverged = |kind| {
        Err(Error::Divergence {
            kind,
            iterations: res.iterations,
        })
    };
    match res.termination {
        Termination::Unbounded => diverged(DivergenceKind::Unbounded),
        Termination::Boundary => diverged(DivergenceKind::Boundary),
        Termination::Converged if q != 1.0 && res.margin < BOUNDARY_MARGIN => diverged(DivergenceKind::Boundary),
        Termination::Converged => Ok(()),
        _ if norm > UNBOUNDED_NORM => diverged(DivergenceKind::Unbounded),
        _ => diverged(DivergenceKind::Boundary),
    }
}

/// Whether the events lie on a proper face of the convex hull of the support,
/// i.e. whether their count-weighted mean is on the hull boundary. Exact for
/// one and two covariates; in higher dimension the fitted intensities are
/// inspected instead.
fn events_on_boundary_face(dist: &CovariateDistribution, counts: &[u64], q: f64, theta: &[f64]) -> bool {
    let p = dist.dim();
    let event_idx: Vec<usize> = (0..dist.len()).filter(|&j| counts[j] > 0).collect();
    if event_idx.is_empty() {
        return true;
    }
    let event_flat: Vec<f64> = event_idx.iter().flat_map(|&j| dist.point(j).iter().copied()).collect();
    if affine_rank(&event_flat, p) == p {
        return false;
    }
    let n: f64 = counts.iter().sum::<u64>() as f64;
    let mut mean = vec![0.0; p];
    for &j in &event_idx {
        for (m, x) in mean.iter_mut().zip(dist.point(j)) {
            *m += counts[j] as f64 * x / n;
        }
    }
    match p {
        1 => {
            let (lo, hi) = dist.points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[0]), hi.max(x[0])));
            mean[0] <= lo || mean[0] >= hi
        }
        2 => on_hull_boundary_2d(dist, &mean),
        _ => {
            // an escaping fit drives the intensity of some event-free points to zero
            let alpha = theta[0];
            let beta = &theta[1..];
            (0..dist.len()).filter(|&j| counts[j] == 0).any(|j| {
                let eta = alpha + beta.iter().zip(dist.point(j)).map(|(b, x)| b * x).sum::<f64>();
                crate::deformed::exp_q(eta, q) < 1e-12
            })
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by the monotone chain, then a strict-interior test for `x`.
fn on_hull_boundary_2d(dist: &CovariateDistribution, x: &[f64]) -> bool {
    let mut pts: Vec<[f64; 2]> = dist.points().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &pt in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
                hull.pop();
            }
            hull.push(pt);
        }
        hull.pop();
    }
    let scale = pts.iter().fold(1.0_f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let x = [x[0], x[1]];
    (0..hull.len()).any(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        cross(a, b, x) <= 1e-12 * scale * len
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(p0: f64) -> CovariateDistribution {
        CovariateDistribution::new(vec![vec![0.0], vec![1.0]], vec![p0, 1.0 - p0]).unwrap()
    }

    #[test]
    fn two_point_closed_form() {
        let f = two_point(0.5);
        for q in [0.0, 0.5, 1.0, 2.0] {
            let fit = fit_additive_smoothing_counts(q, &f, &[3, 0], 0.5, &FitOptions::default()).unwrap();
            assert!(fit.converged, "q = {q}");
            let l0 = fit.model.point_intensity(0);
            let l1 = fit.model.point_intensity(1);
            assert!((l0 - 3.25).abs() < 1e-9 && (l1 - 0.25).abs() < 1e-9, "q = {q}: {l0} {l1}");
        }
    }

    #[test]
    fn empty_sample_with_penalty_converges() {
        let f = CovariateDistribution::uniform(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let fit = fit_additive_smoothing(0.5, &f, &EventSample::empty(1), 1.0).unwrap();
        assert!(fit.converged && fit.model.margin() > 0.0);
    }

    #[test]
    fn no_data_without_penalty_diverges() {
        let f = two_point(0.5);
        let err = fit_additive_smoothing(1.0, &f, &EventSample::empty(1), 0.0).unwrap_err();
        assert!(matches!(err, Error::Divergence { kind: DivergenceKind::NoData, .. }));
    }

    #[test]
    fn q_zero_endpoint_missing_diverges() {
        let f = CovariateDistribution::uniform(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let err = fit_additive_smoothing_counts(0.0, &f, &[0, 2, 3], 0.0, &FitOptions::default()).unwrap_err();
        assert!(err.is_divergence(), "{err}");
    }

    #[test]
    fn q_one_events_on_extreme_point_diverges() {
        let f = CovariateDistribution::uniform(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let err = fit_additive_smoothing_counts(1.0, &f, &[0, 0, 4], 0.0, &FitOptions::default()).unwrap_err();
        assert!(err.is_divergence(), "{err}");
        // interior mean: the maximum likelihood estimate exists
        let fit = fit_additive_smoothing_counts(1.0, &f, &[0, 1, 2], 0.0, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.total_intensity - 3.0).abs() < 1e-9, "{:?} {} {}", fit.summary(), fit.gradient_norm, fit.iterations);
    }

    #[test]
    fn hull_test_2d() {
        let f = CovariateDistribution::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]])
            .unwrap();
        assert!(!on_hull_boundary_2d(&f, &[0.5, 0.5]));
        assert!(on_hull_boundary_2d(&f, &[0.5, 0.0]));
        assert!(on_hull_boundary_2d(&f, &[1.0, 1.0]));
        assert!(!on_hull_boundary_2d(&f, &[0.2, 0.9]));
    }

    #[test]
    fn json_has_expected_keys() {
        let fit = fit_additive_smoothing_counts(1.0, &two_point(0.5), &[1, 2], 1.0, &FitOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fit.to_json()).unwrap();
        for key in ["q", "kappa", "alpha", "beta", "total_intensity", "objective", "converged"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
