//! The t-logistic distribution `G_t(z) = exp_t(z - gamma)`, where `gamma >= 0`
//! solves `exp_t(z - gamma) + exp_t(-gamma) = 1`.
//!
//! `t = 1` is the logistic distribution and `t = 0` the uniform distribution
//! on `[-1, 1]`. The lower tail index is `max(t, 0)`.
//!
//! The root is always solved for `z <= 0`, where `gamma` is small and both
//! class probabilities can be recovered with full relative accuracy; the
//! upper half follows from the symmetry `G_t(-z) = 1 - G_t(z)`, which is the
//! same as `gamma(z) = gamma(-z) + z`.

use super::qexp::{exp_q, exp_q_m1, ln_exp_q, ln_q};
use super::root::{brent, RootOptions};
use crate::{Error, Result};

/// Largest residual `|A + B - 1|` accepted from the root solve.
pub const RESIDUAL_TOL: f64 = 1e-14;

/// The two class probabilities at one point, with their logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TLogisticPoint {
    pub gamma: f64,
    pub cdf: f64,
    pub sf: f64,
    pub log_cdf: f64,
    pub log_sf: f64,
}

impl TLogisticPoint {
    fn reflect(self, z: f64) -> Self {
        TLogisticPoint {
            gamma: self.gamma + z,
            cdf: self.sf,
            sf: self.cdf,
            log_cdf: self.log_sf,
            log_sf: self.log_cdf,
        }
    }
}

/// Solves for `gamma_t(z)` with `z <= 0`.
fn solve_gamma_lower(t: f64, z: f64) -> Result<f64> {
    debug_assert!(z <= 0.0);
    // A(gamma) + (B(gamma) - 1); decreasing in gamma, nonnegative at 0.
    let residual = |g: f64| exp_q(z - g, t) + exp_q_m1(-g, t);

    if residual(0.0) == 0.0 {
        // z at or below the lower end of the support
        return Ok(0.0);
    }
    let mut hi = z.max(0.0) + 2.0;
    let mut expansions = 0;
    while residual(hi) > 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 || !hi.is_finite() {
            return Err(Error::RootNotConverged(format!(
                "t-logistic: no sign change for t = {t}, z = {z}"
            )));
        }
    }
    let root = brent(residual, 0.0, hi, RootOptions::default())
        .map_err(|e| Error::RootNotConverged(format!("t-logistic (t = {t}, z = {z}): {e}")))?;
    // Near the support edge for t < 0 the residual is steep in gamma, so a
    // sign change within a few ulps also counts as converged.
    let delta = 8.0 * f64::EPSILON * root.x.abs().max(f64::MIN_POSITIVE);
    let bracketed = residual(root.x - delta) * residual(root.x + delta) <= 0.0;
    if root.residual.abs() > RESIDUAL_TOL && !bracketed {
        return Err(Error::RootNotConverged(format!(
            "t-logistic (t = {t}, z = {z}): residual {:e} above tolerance",
            root.residual
        )));
    }
    Ok(root.x)
}

/// Evaluates the t-logistic distribution at `z`.
pub fn t_logistic_point(t: f64, z: f64) -> Result<TLogisticPoint> {
    if !t.is_finite() || z.is_nan() {
        return Err(Error::invalid_arg(format!("t-logistic needs finite t and z, got t = {t}, z = {z}")));
    }
    if z > 0.0 {
        return Ok(t_logistic_point(t, -z)?.reflect(z));
    }
    let gamma = solve_gamma_lower(t, z)?;
    // For t < 0 the slope A^t of exp_t blows up at the lower support edge,
    // so A = 1 - B is far better conditioned there than exp_t(z - gamma).
    let log_cdf = if t < 0.0 {
        (-exp_q_m1(-gamma, t)).ln()
    } else {
        ln_exp_q(z - gamma, t)
    };
    let log_sf = ln_exp_q(-gamma, t);
    Ok(TLogisticPoint {
        gamma,
        cdf: log_cdf.exp(),
        sf: log_sf.exp(),
        log_cdf,
        log_sf,
    })
}

/// `gamma_t(z)`, the root of the normalizing condition.
pub fn t_logistic_gamma(t: f64, z: f64) -> Result<f64> {
    Ok(t_logistic_point(t, z)?.gamma)
}

/// `G_t(z)`.
pub fn t_logistic_cdf(t: f64, z: f64) -> Result<f64> {
    Ok(t_logistic_point(t, z)?.cdf)
}

/// Log-density `log g_t(z)` from the class probabilities.
///
/// Implicit differentiation of the normalizing condition gives
/// `gamma' = A^t / (A^t + B^t)` and `g = A^t (1 - gamma') = 1 / (A^{-t} + B^{-t})`.
fn log_density_at(t: f64, pt: &TLogisticPoint) -> f64 {
    if pt.log_cdf == f64::NEG_INFINITY || pt.log_sf == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let u = -t * pt.log_cdf;
    let v = -t * pt.log_sf;
    let m = u.max(v);
    -(m + ((u - m).exp() + (v - m).exp()).ln())
}

pub fn t_logistic_density(t: f64, z: f64) -> Result<f64> {
    let pt = t_logistic_point(t, z)?;
    Ok(log_density_at(t, &pt).exp())
}

/// `log G_t(z)` and its first two derivatives.
///
/// With `g' = t g^3 (A^{-t-1} - B^{-t-1})`, the second derivative is
/// `g'/A - (g/A)^2`; every term is formed in log space so that tiny `A`
/// does not overflow the intermediate powers.
pub fn t_logistic_log_cdf_derivs(t: f64, z: f64) -> Result<[f64; 3]> {
    let pt = t_logistic_point(t, z)?;
    Ok(log_cdf_derivs_at(t, &pt))
}

fn log_cdf_derivs_at(t: f64, pt: &TLogisticPoint) -> [f64; 3] {
    let la = pt.log_cdf;
    let lb = pt.log_sf;
    if la == f64::NEG_INFINITY {
        return [f64::NEG_INFINITY, 0.0, 0.0];
    }
    let lg = log_density_at(t, pt);
    if lg == f64::NEG_INFINITY {
        return [la, 0.0, 0.0];
    }
    let d1 = (lg - la).exp();
    let gp_over_a = if t == 0.0 {
        0.0
    } else {
        t * ((3.0 * lg - (t + 2.0) * la).exp() - (3.0 * lg - (t + 1.0) * lb - la).exp())
    };
    [la, d1, gp_over_a - d1 * d1]
}

/// `log(1 - G_t(z))` and its first two derivatives, by symmetry.
pub fn t_logistic_log_sf_derivs(t: f64, z: f64) -> Result<[f64; 3]> {
    let [v, d1, d2] = t_logistic_log_cdf_derivs(t, -z)?;
    Ok([v, -d1, d2])
}

/// Closed-form quantile `ln_t(u) - ln_t(1-u)`.
pub fn t_logistic_quantile(t: f64, u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return f64::NAN;
    }
    ln_q(u, t) - ln_q(1.0 - u, t)
}

/// Lower end of the support: `-1/(1-t)` for `t < 1`, `-inf` otherwise.
pub fn t_logistic_support_min(t: f64) -> f64 {
    if t < 1.0 {
        -1.0 / (1.0 - t)
    } else {
        f64::NEG_INFINITY
    }
}
