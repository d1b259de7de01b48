//! Extreme-value normalizing sequences `(q, c_m, d_m)` with
//! `m G(c_m + d_m z) -> exp_q(z)` as `m -> inf`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::link::LinkFamily;
use super::qexp::exp_q;
use super::tlogistic::t_logistic_support_min;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizingTriple {
    /// Tail index.
    pub q: f64,
    /// Location `c_m`.
    pub c: f64,
    /// Scale `d_m > 0`.
    pub d: f64,
    /// Sample size the sequence was evaluated at.
    pub m: u64,
}

/// The normalizing sequence of `family` at sample size `m >= 2`.
///
/// Logistic and Gumbel use `(1, -log m, 1)`, the normal uses the classical
/// `(2 log m)^{1/2}` expansion and the Cauchy `(2, -m/pi, m/pi)`. The uniform
/// and t-logistic triples are read off the lower-tail expansions of each
/// distribution so that the limit is exactly `exp_q(z)`:
///
/// | family              | q    | c_m                          | d_m           |
/// |---------------------|------|------------------------------|---------------|
/// | uniform, t = 0      | 0    | `-1 + 2/m`                   | `2/m`         |
/// | t-logistic, t > 1   | t    | `-m^{t-1}/(t-1)`             | `m^{t-1}`     |
/// | t-logistic, 0<t<1   | t    | `z* + m^{t-1}/(1-t)`         | `m^{t-1}`     |
/// | t-logistic, t < 0   | 0    | `z* + 1/m`                   | `1/m`         |
///
/// where `z* = -1/(1-t)` is the lower end of the t-logistic support.
pub fn normalizing_sequence(family: &LinkFamily, m: u64) -> Result<NormalizingTriple> {
    if m < 2 {
        return Err(Error::invalid_arg(format!("normalizing sequence needs m >= 2, got {m}")));
    }
    let mf = m as f64;
    let (q, c, d) = match *family {
        LinkFamily::Logistic | LinkFamily::GumbelMin => (1.0, -mf.ln(), 1.0),
        LinkFamily::Normal => {
            let l = (2.0 * mf.ln()).sqrt();
            let c = -l + (mf.ln().ln() + (4.0 * PI).ln()) / (2.0 * l);
            (1.0, c, 1.0 / l)
        }
        LinkFamily::Cauchy => (2.0, -mf / PI, mf / PI),
        LinkFamily::Uniform => uniform_triple(mf),
        LinkFamily::TLogistic(t) => {
            if t == 1.0 {
                (1.0, -mf.ln(), 1.0)
            } else if t == 0.0 {
                uniform_triple(mf)
            } else if t > 1.0 {
                let s = mf.powf(t - 1.0);
                (t, -s / (t - 1.0), s)
            } else if t > 0.0 {
                let s = mf.powf(t - 1.0);
                (t, t_logistic_support_min(t) + s / (1.0 - t), s)
            } else {
                (0.0, t_logistic_support_min(t) + 1.0 / mf, 1.0 / mf)
            }
        }
    };
    Ok(NormalizingTriple { q, c, d, m })
}

fn uniform_triple(m: f64) -> (f64, f64, f64) {
    (0.0, -1.0 + 2.0 / m, 2.0 / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevResidual {
    pub z: f64,
    /// `m G(c_m + d_m z)`.
    pub scaled_cdf: f64,
    /// `exp_q(z)`.
    pub limit: f64,
    /// `m G(c_m + d_m z) - exp_q(z)`.
    pub residual: f64,
}

/// Residuals of the extreme-value approximation on a grid of `z` values.
///
/// Only points where `exp_q(z)` is finite are meaningful; elsewhere the
/// residual is `-inf`.
pub fn verify_gev(family: &LinkFamily, m: u64, z_grid: &[f64]) -> Result<Vec<GevResidual>> {
    let triple = normalizing_sequence(family, m)?;
    let mf = m as f64;
    Ok(z_grid
        .iter()
        .map(|&z| {
            let x = triple.c + triple.d * z;
            let scaled_cdf = mf * family.log_cdf(x).exp();
            let limit = exp_q(z, triple.q);
            // m * 0 - 0 outside both supports
            let residual = if scaled_cdf == 0.0 && limit == 0.0 {
                0.0
            } else {
                scaled_cdf - limit
            };
            GevResidual { z, scaled_cdf, limit, residual }
        })
        .collect())
}
