//! Safeguarded bracketing root finder (Brent's method).
//!
//! Every iterate stays inside a bracket whose endpoints have residuals of
//! opposite sign; inverse quadratic interpolation and secant steps are taken
//! only when they shrink the bracket fast enough, otherwise the step falls
//! back to bisection.

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute part of the bracket-width tolerance.
    pub x_abs_tol: f64,
    /// Relative part of the bracket-width tolerance.
    pub x_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            x_abs_tol: 0.0,
            x_rel_tol: 4.0 * f64::EPSILON,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// `f(lo)` and `f(hi)` have the same strict sign.
    NotBracketed { f_lo: f64, f_hi: f64 },
    /// The residual was NaN somewhere in the bracket.
    NanResidual { x: f64 },
    MaxIterations { x: f64, residual: f64 },
}

impl std::fmt::Display for RootError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootError::NotBracketed { f_lo, f_hi } => {
                write!(f, "root not bracketed: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")
            }
            RootError::NanResidual { x } => write!(f, "residual is NaN at x = {x:e}"),
            RootError::MaxIterations { x, residual } => {
                write!(f, "iteration limit reached at x = {x:e} (residual {residual:e})")
            }
        }
    }
}

/// Finds a root of `f` in `[lo, hi]`.
pub fn brent<F>(f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root, RootError>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() {
        return Err(RootError::NanResidual { x: a });
    }
    if fb.is_nan() {
        return Err(RootError::NanResidual { x: b });
    }
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { f_lo: fa, f_hi: fb });
    }

    // b is the best estimate, c the counterpoint, d/e the last two steps.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol = 2.0 * f64::EPSILON * b.abs()
            + 0.5 * (opts.x_abs_tol + opts.x_rel_tol * b.abs())
            + f64::MIN_POSITIVE;
        let half = 0.5 * (c - b);
        if fb == 0.0 || half.abs() <= tol {
            return Ok(Root { x: b, residual: fb, iterations: iter });
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * half * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
        if fb.is_nan() {
            return Err(RootError::NanResidual { x: b });
        }
    }
    Err(RootError::MaxIterations { x: b, residual: fb })
}
