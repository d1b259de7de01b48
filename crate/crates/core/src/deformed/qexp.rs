//! The q-exponential function and its logarithm.
//!
//! `exp_q(z) = [1 + (1-q) z]_+^{1/(1-q)}` for `q != 1` and `e^z` for `q = 1`,
//! with the convention `[0]_+^{negative} = +inf`. For `q > 1` the function
//! blows up at `z = 1/(q-1)`; for `q < 1` it vanishes below `z = -1/(1-q)`.

use serde::{Deserialize, Serialize};

/// Below this value of `|(1-q) z|` the series in `(1-q) z` is used instead of
/// the closed form.
const SERIES_CUTOFF: f64 = 1e-4;

/// Deformation index of a q-exponential family.
///
/// Any finite real is accepted. `exp_q` is convex iff `q >= 0` and
/// `ln exp_q` is concave iff `q <= 1`, so the penalized point-process
/// likelihood is concave exactly for `0 <= q <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QIndex(f64);

impl QIndex {
    pub fn new(q: f64) -> crate::Result<Self> {
        if !q.is_finite() {
            return Err(crate::Error::invalid_arg(format!("q must be finite, got {q}")));
        }
        Ok(QIndex(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn exp(self, z: f64) -> f64 {
        exp_q(z, self.0)
    }

    pub fn ln_exp(self, z: f64) -> f64 {
        ln_exp_q(z, self.0)
    }

    /// Whether the penalized point-process likelihood is concave.
    pub fn is_concave_regime(self) -> bool {
        (0.0..=1.0).contains(&self.0)
    }
}

impl std::fmt::Display for QIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `log(1 + u) / u` for small `u`.
#[inline]
fn log1p_ratio_series(u: f64) -> f64 {
    1.0 - u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u * 0.2)))
}

/// The q-exponential `exp_q(z)`; returns `+inf` when `q > 1` and
/// `z >= 1/(q-1)`, and `0` when `q < 1` and `z <= -1/(1-q)`.
pub fn exp_q(z: f64, q: f64) -> f64 {
    if q == 1.0 {
        return z.exp();
    }
    let l = ln_exp_q(z, q);
    if l == f64::INFINITY {
        f64::INFINITY
    } else {
        l.exp()
    }
}

/// `log exp_q(z)`, computed in log space.
///
/// Returns `-inf` where `exp_q(z) = 0` and `+inf` where `exp_q(z) = inf`.
pub fn ln_exp_q(z: f64, q: f64) -> f64 {
    if q == 1.0 {
        return z;
    }
    let one_minus_q = 1.0 - q;
    let u = one_minus_q * z;
    if u.abs() < SERIES_CUTOFF {
        return z * log1p_ratio_series(u);
    }
    if 1.0 + u <= 0.0 {
        return if q < 1.0 { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    u.ln_1p() / one_minus_q
}

/// `exp_q(z) - 1`, accurate when the result is small.
pub fn exp_q_m1(z: f64, q: f64) -> f64 {
    let l = ln_exp_q(z, q);
    if l == f64::NEG_INFINITY {
        -1.0
    } else {
        l.exp_m1()
    }
}

/// The deformed logarithm `ln_q(x) = (x^{1-q} - 1)/(1-q)`, inverse of `exp_q`
/// on `x > 0`.
pub fn ln_q(x: f64, q: f64) -> f64 {
    if x <= 0.0 {
        return if q < 1.0 { -1.0 / (1.0 - q) } else { f64::NEG_INFINITY };
    }
    let lx = x.ln();
    if q == 1.0 {
        return lx;
    }
    let one_minus_q = 1.0 - q;
    let v = one_minus_q * lx;
    if v.abs() < SERIES_CUTOFF {
        // (e^v - 1)/v
        return lx * (1.0 + v * (0.5 + v * (1.0 / 6.0 + v / 24.0)));
    }
    v.exp_m1() / one_minus_q
}

/// `exp_q(z)` together with its first two derivatives in `z`.
///
/// `d/dz exp_q = exp_q^q` and `d^2/dz^2 exp_q = q exp_q^{2q-1}`.
pub fn exp_q_derivs(z: f64, q: f64) -> [f64; 3] {
    let l = ln_exp_q(z, q);
    if l == f64::NEG_INFINITY {
        return [0.0, 0.0, 0.0];
    }
    if l == f64::INFINITY {
        return [f64::INFINITY; 3];
    }
    [l.exp(), (q * l).exp(), q * ((2.0 * q - 1.0) * l).exp()]
}

/// `ln exp_q(z)` together with its first two derivatives in `z`.
pub fn ln_exp_q_derivs(z: f64, q: f64) -> [f64; 3] {
    let l = ln_exp_q(z, q);
    if !l.is_finite() {
        return [l, 0.0, 0.0];
    }
    let base = 1.0 + (1.0 - q) * z;
    let d1 = 1.0 / base;
    [l, d1, -(1.0 - q) * d1 * d1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(exp_q(0.0, 7.3), 1.0);
        assert_eq!(exp_q(-2.0, 0.0), 0.0);
        assert!((exp_q(0.5, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(ln_exp_q(3.0, 1.0), 3.0);
        assert_eq!(ln_exp_q(-2.0, 0.0), f64::NEG_INFINITY);
        assert!((ln_exp_q(0.5, 2.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pole_for_q_above_one() {
        assert_eq!(exp_q(1.0, 2.0), f64::INFINITY);
        assert_eq!(exp_q(3.0, 2.0), f64::INFINITY);
        assert_eq!(ln_exp_q(0.5, 3.0), f64::INFINITY);
        assert!(exp_q(0.999, 2.0).is_finite());
    }

    #[test]
    fn continuity_near_q_one() {
        // high-precision values of exp(log(1 + (1-q) z)/(1-q)) at z = 1
        let above = 2.718_281_842_050_454_4;
        let below = 2.718_281_814_867_636_1;
        assert!((exp_q(1.0, 1.0 + 1e-8) - above).abs() < 1e-14);
        assert!((exp_q(1.0, 1.0 - 1e-8) - below).abs() < 1e-14);
        assert!((exp_q(1.0, 1.0 + 1e-8) - std::f64::consts::E).abs() < 1e-6);
    }

    #[test]
    fn series_branch_matches_closed_form_at_cutoff() {
        for &z in &[-3.0f64, -0.5, 0.7, 2.0] {
            let q = 1.0 - SERIES_CUTOFF / z.abs() * 0.999;
            let q2 = 1.0 - SERIES_CUTOFF / z.abs() * 1.001;
            let a = ln_exp_q(z, q);
            let b = ln_exp_q(z, q2);
            // both sides of the switch agree with the closed form within rounding
            let exact = |q: f64| ((1.0 - q) * z).ln_1p() / (1.0 - q);
            assert!((a - exact(q)).abs() < 1e-12 * z.abs().max(1.0));
            assert!((b - exact(q2)).abs() < 1e-12 * z.abs().max(1.0));
        }
    }

    #[test]
    fn ln_q_inverts_exp_q() {
        for &q in &[-1.0, 0.0, 0.5, 1.0, 1.5, 2.0] {
            for &z in &[-0.4, 0.0, 0.3] {
                let x = exp_q(z, q);
                assert!((ln_q(x, q) - z).abs() < 1e-13, "q={q} z={z}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &q in &[-0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
            for &z in &[-0.3, 0.1, 0.4] {
                let [v, d1, d2] = exp_q_derivs(z, q);
                assert!((v - exp_q(z, q)).abs() < 1e-15);
                let fd1 = (exp_q(z + h, q) - exp_q(z - h, q)) / (2.0 * h);
                let fd2 = (exp_q(z + h, q) - 2.0 * v + exp_q(z - h, q)) / (h * h);
                assert!((d1 - fd1).abs() < 1e-8 * d1.abs().max(1.0));
                assert!((d2 - fd2).abs() < 1e-4 * d2.abs().max(1.0));
                let [l, e1, e2] = ln_exp_q_derivs(z, q);
                let fe1 = (ln_exp_q(z + h, q) - ln_exp_q(z - h, q)) / (2.0 * h);
                let fe2 = (ln_exp_q(z + h, q) - 2.0 * l + ln_exp_q(z - h, q)) / (h * h);
                assert!((e1 - fe1).abs() < 1e-8 * e1.abs().max(1.0));
                assert!((e2 - fe2).abs() < 1e-4 * e2.abs().max(1.0));
            }
        }
    }
}
