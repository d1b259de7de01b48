use serde::{Deserialize, Serialize};

use super::likelihood::GlmObjective;
use super::{normalize_coefficients, BinaryDataset, NormalizedCoefficients, RawCoefficients};
use crate::deformed::{normalizing_sequence, LinkFamily};
use crate::optim::{maximize_multistart, NewtonOptions, NewtonResult, Objective, Termination};
use crate::{Error, Result};

/// Parameter norm beyond which an unfinished unpenalized fit is attributed
/// to separation rather than slow convergence.
const SEPARATION_NORM: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct GlmOptions {
    /// Additive-smoothing weight; 0 gives the plain maximum-likelihood fit.
    pub kappa: f64,
    pub newton: NewtonOptions,
    /// Overrides the default start `(G^{-1}(mean y), 0)`.
    pub start: Option<RawCoefficients>,
    /// Restart from perturbed starts when the family is not log-concave.
    pub multistart: bool,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            kappa: 0.0,
            newton: NewtonOptions::default(),
            start: None,
            multistart: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub family: LinkFamily,
    pub kappa: f64,
    pub coefficients: RawCoefficients,
    /// Unpenalized log-likelihood at the fitted coefficients.
    pub log_likelihood: f64,
    /// The maximized objective (equal to `log_likelihood` when `kappa = 0`).
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl GlmFit {
    /// Coefficients rescaled with the family's normalizing sequence at `m`.
    pub fn normalized(&self, m: u64) -> Result<NormalizedCoefficients> {
        let triple = normalizing_sequence(&self.family, m)?;
        Ok(normalize_coefficients(&self.coefficients, &triple))
    }
}

/// Fits the binomial model, optionally with the additive-smoothing penalty.
pub fn fit_glm(data: &BinaryDataset, family: &LinkFamily, kappa: Option<f64>) -> Result<GlmFit> {
    let opts = GlmOptions {
        kappa: kappa.unwrap_or(0.0),
        ..GlmOptions::default()
    };
    fit_glm_with(data, family, &opts)
}

pub fn fit_glm_with(data: &BinaryDataset, family: &LinkFamily, opts: &GlmOptions) -> Result<GlmFit> {
    if !(opts.kappa >= 0.0 && opts.kappa.is_finite()) {
        return Err(Error::invalid_arg(format!("kappa must be a finite nonnegative number, got {}", opts.kappa)));
    }
    data.require_both_classes()?;
    let p = data.dim();

    let base = match &opts.start {
        Some(s) if s.b.len() != p => {
            return Err(Error::invalid_arg(format!("start has {} slopes, data has {p} covariates", s.b.len())));
        }
        Some(s) => s.to_params(),
        None => {
            let mut v = vec![0.0; p + 1];
            v[0] = family.quantile(data.mean_label());
            v
        }
    };
    let mut starts = vec![base.clone()];
    if opts.multistart && !family.is_log_concave() {
        starts.extend(sign_pattern_starts(&base, 0.5));
    }

    let objective = GlmObjective::new(data, *family, opts.kappa);
    let best = maximize_multistart(&objective, &starts, &opts.newton)
        .ok_or_else(|| Error::invalid_arg("no starting point"))?;

    if best.termination == Termination::InfeasibleStart {
        return Err(Error::invalid_arg("objective is not finite at the starting point"));
    }
    check_separation(&best, opts.kappa)?;

    let coefficients = RawCoefficients::from_params(&best.x);
    let log_likelihood = if opts.kappa == 0.0 {
        best.value
    } else {
        GlmObjective::new(data, *family, 0.0).value(&best.x)
    };
    Ok(GlmFit {
        family: *family,
        kappa: opts.kappa,
        coefficients,
        log_likelihood,
        objective: best.value,
        converged: best.converged(),
        iterations: best.iterations,
        gradient_norm: best.grad_norm,
    })
}

fn check_separation(res: &NewtonResult, kappa: f64) -> Result<()> {
    let norm = res.x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let separated = res.termination == Termination::Unbounded
        || (kappa == 0.0
            && (res.value == 0.0 || (!res.converged() && norm > SEPARATION_NORM)));
    if separated {
        return Err(Error::PerfectSeparation {
            iterations: res.iterations,
            norm,
        });
    }
    Ok(())
}

/// `base` plus every sign pattern of `+-delta` on its first `min(len, 3)` coordinates.
pub(crate) fn sign_pattern_starts(base: &[f64], delta: f64) -> Vec<Vec<f64>> {
    let k = base.len().min(3);
    (0..1usize << k)
        .map(|mask| {
            let mut s = base.to_vec();
            for (i, v) in s.iter_mut().take(k).enumerate() {
                *v += if mask >> i & 1 == 1 { -delta } else { delta };
            }
            s
        })
        .collect()
}
