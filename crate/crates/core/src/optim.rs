//! Damped Newton maximization with a feasibility-preserving backtracking
//! line search.
//!
//! The objective reports `-inf` (or NaN) outside its domain; the line search
//! halves the step until the trial point is feasible and satisfies the Armijo
//! condition. When the Hessian is not negative definite the direction comes
//! from a Levenberg-shifted system `(-H + mu I) d = g`, which tends to plain
//! gradient ascent as `mu` grows.

use nalgebra::{DMatrix, DVector};

pub trait Objective {
    fn dim(&self) -> usize;

    /// Objective value; `-inf` or NaN outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    /// Value, gradient and Hessian at a feasible point.
    fn derivatives(&self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>);

    /// Distance-like measure to the boundary of the domain (`+inf` when
    /// unconstrained). Used only for divergence detection.
    fn margin(&self, _x: &[f64]) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Absolute tolerance on the gradient infinity norm.
    pub grad_tol: f64,
    /// When the line search can make no further progress, the point is still
    /// accepted as converged if `|g|_inf <= stall_rel_tol * max(1, |f|)`.
    pub stall_rel_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Try doubling a fully accepted step while the objective keeps rising.
    pub expand_steps: bool,
    /// Parameter infinity norm beyond which a rising objective counts as unbounded.
    pub divergence_norm: f64,
    pub boundary_margin: f64,
    /// Consecutive non-decreasing iterations below `boundary_margin` that
    /// count as running into the boundary.
    pub boundary_patience: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 500,
            grad_tol: 1e-10,
            stall_rel_tol: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 80,
            expand_steps: true,
            divergence_norm: 1e8,
            boundary_margin: 1e-10,
            boundary_patience: 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// The line search found no acceptable step and the gradient is not small.
    Stalled,
    /// The objective keeps rising while the parameters run off to infinity.
    Unbounded,
    /// The iterates are pinned against the boundary of the domain.
    Boundary,
    /// The starting point is outside the domain.
    InfeasibleStart,
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub margin: f64,
}

impl NewtonResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Solves `(-H + mu I) d = g`, increasing `mu` from zero until the shifted
/// matrix is positive definite.
fn ascent_direction(grad: &DVector<f64>, hess: &DMatrix<f64>) -> DVector<f64> {
    let neg = -hess;
    if let Some(chol) = neg.clone().cholesky() {
        return chol.solve(grad);
    }
    let n = grad.len();
    let scale = (0..n).fold(1e-12_f64, |acc, i| acc.max(neg[(i, i)].abs()));
    let mut mu = 1e-8 * scale;
    loop {
        let shifted = &neg + DMatrix::<f64>::identity(n, n) * mu;
        if let Some(chol) = shifted.cholesky() {
            return chol.solve(grad);
        }
        mu *= 10.0;
        if !mu.is_finite() {
            return grad.clone();
        }
    }
}

fn axpy(x: &[f64], t: f64, d: &DVector<f64>) -> Vec<f64> {
    x.iter().zip(d.iter()).map(|(xi, di)| xi + t * di).collect()
}

/// Maximizes `obj` from `start`.
pub fn maximize<O: Objective + ?Sized>(obj: &O, start: &[f64], opts: &NewtonOptions) -> NewtonResult {
    let mut x = start.to_vec();
    let f0 = obj.value(&x);
    if !f0.is_finite() {
        return NewtonResult {
            x,
            value: f0,
            grad_norm: f64::NAN,
            iterations: 0,
            termination: Termination::InfeasibleStart,
            margin: obj.margin(start),
        };
    }

    let mut prev_value = f64::NEG_INFINITY;
    let mut near_boundary = 0usize;

    for iter in 0..opts.max_iter {
        let (f, grad, hess) = obj.derivatives(&x);
        let grad_norm = inf_norm(grad.as_slice());
        let margin = obj.margin(&x);
        let done = |termination| NewtonResult {
            x: x.clone(),
            value: f,
            grad_norm,
            iterations: iter,
            termination,
            margin,
        };

        if grad_norm <= opts.grad_tol {
            return done(Termination::Converged);
        }
        if inf_norm(&x) > opts.divergence_norm && f > prev_value {
            return done(Termination::Unbounded);
        }
        if margin < opts.boundary_margin && f >= prev_value {
            near_boundary += 1;
            if near_boundary >= opts.boundary_patience {
                return done(Termination::Boundary);
            }
        } else {
            near_boundary = 0;
        }

        let dir = ascent_direction(&grad, &hess);
        let mut slope = grad.dot(&dir);
        let newton_dir = slope.is_finite() && slope > 0.0;
        let dir = if newton_dir {
            dir
        } else {
            slope = grad.dot(&grad);
            grad.clone()
        };

        // Flat: either the gradient is tiny relative to f, or the Newton
        // decrement predicts a gain below the rounding level of f.
        let scale = f.abs().max(1.0);
        let numerically_flat =
            grad_norm <= opts.stall_rel_tol * scale || (newton_dir && slope <= 64.0 * f64::EPSILON * scale);
        // Near a stationary point the value change of a Newton step is below
        // rounding, so the line search cannot judge it; take the full step
        // while it still shrinks the gradient.
        let gradient_progress = |trial: &[f64]| {
            obj.value(trial).is_finite() && {
                let (_, g, _) = obj.derivatives(trial);
                inf_norm(g.as_slice()) <= 0.5 * grad_norm
            }
        };
        if numerically_flat {
            let trial = axpy(&x, 1.0, &dir);
            if gradient_progress(&trial) {
                prev_value = f;
                x = trial;
                continue;
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = axpy(&x, step, &dir);
            let ft = obj.value(&trial);
            if ft.is_finite() && ft - f >= opts.armijo * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= opts.backtrack;
        }

        let Some((mut next, mut next_value)) = accepted else {
            let termination = if numerically_flat {
                Termination::Converged
            } else if margin < opts.boundary_margin {
                Termination::Boundary
            } else {
                Termination::Stalled
            };
            return done(termination);
        };

        if opts.expand_steps && step == 1.0 && slope > f64::EPSILON.sqrt() * f.abs().max(1.0) {
            let mut t = 2.0;
            for _ in 0..60 {
                let trial = axpy(&x, t, &dir);
                let ft = obj.value(&trial);
                if !(ft.is_finite() && ft > next_value) {
                    break;
                }
                next = trial;
                next_value = ft;
                t *= 2.0;
            }
        }

        if next_value <= f && numerically_flat {
            // no measurable progress at a numerically stationary point
            x = next;
            let (f, grad, _) = obj.derivatives(&x);
            return NewtonResult {
                margin: obj.margin(&x),
                x,
                value: f,
                grad_norm: inf_norm(grad.as_slice()),
                iterations: iter + 1,
                termination: Termination::Converged,
            };
        }

        prev_value = f;
        x = next;
    }

    let (f, grad, _) = obj.derivatives(&x);
    let grad_norm = inf_norm(grad.as_slice());
    let termination = if grad_norm <= opts.grad_tol {
        Termination::Converged
    } else if inf_norm(&x) > opts.divergence_norm {
        Termination::Unbounded
    } else if obj.margin(&x) < opts.boundary_margin {
        Termination::Boundary
    } else {
        Termination::MaxIterations
    };
    NewtonResult {
        margin: obj.margin(&x),
        x,
        value: f,
        grad_norm,
        iterations: opts.max_iter,
        termination,
    }
}

/// Runs [`maximize`] from every start and keeps the best converged result
/// (or the best overall if none converged). Ties keep the earliest start.
pub fn maximize_multistart<O: Objective + ?Sized>(
    obj: &O,
    starts: &[Vec<f64>],
    opts: &NewtonOptions,
) -> Option<NewtonResult> {
    let results: Vec<NewtonResult> = starts.iter().map(|s| maximize(obj, s, opts)).collect();
    let pick = |pred: &dyn Fn(&NewtonResult) -> bool| {
        results
            .iter()
            .filter(|r| pred(r) && r.value.is_finite())
            .fold(None::<&NewtonResult>, |best, r| match best {
                Some(b) if b.value >= r.value => Some(b),
                _ => Some(r),
            })
            .cloned()
    };
    pick(&|r| r.converged()).or_else(|| pick(&|_| true)).or_else(|| results.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic;

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> f64 {
            -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 2.0).powi(2) + 0.5 * x[0] * x[1]
        }
        fn derivatives(&self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
            let g = DVector::from_vec(vec![-2.0 * (x[0] - 1.0) + 0.5 * x[1], -20.0 * (x[1] + 2.0) + 0.5 * x[0]]);
            let h = DMatrix::from_row_slice(2, 2, &[-2.0, 0.5, 0.5, -20.0]);
            (self.value(x), g, h)
        }
    }

    /// `log x - x` on `x > 0`, maximized at 1.
    struct LogBarrier;

    impl Objective for LogBarrier {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            if x[0] <= 0.0 {
                f64::NEG_INFINITY
            } else {
                x[0].ln() - x[0]
            }
        }
        fn derivatives(&self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
            let v = x[0];
            (self.value(x), DVector::from_vec(vec![1.0 / v - 1.0]), DMatrix::from_element(1, 1, -1.0 / (v * v)))
        }
        fn margin(&self, x: &[f64]) -> f64 {
            x[0]
        }
    }

    /// `-(x^2 - 1)^2`: indefinite Hessian near the origin.
    struct DoubleWell;

    impl Objective for DoubleWell {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            -(x[0] * x[0] - 1.0).powi(2)
        }
        fn derivatives(&self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
            let v = x[0];
            (
                self.value(x),
                DVector::from_vec(vec![-4.0 * v * (v * v - 1.0)]),
                DMatrix::from_element(1, 1, -12.0 * v * v + 4.0),
            )
        }
    }

    /// `-e^x`: supremum 0 approached as x -> -inf.
    struct NoMax;

    impl Objective for NoMax {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            -x[0].exp()
        }
        fn derivatives(&self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
            let e = x[0].exp();
            (-e, DVector::from_vec(vec![-e]), DMatrix::from_element(1, 1, -e))
        }
    }

    #[test]
    fn quadratic_in_one_step() {
        let r = maximize(&Quadratic, &[0.0, 0.0], &NewtonOptions::default());
        assert!(r.converged());
        assert!(r.iterations <= 2);
    }

    #[test]
    fn respects_domain() {
        let r = maximize(&LogBarrier, &[50.0], &NewtonOptions::default());
        assert!(r.converged());
        assert!((r.x[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn escapes_saddle() {
        let r = maximize(&DoubleWell, &[0.1], &NewtonOptions::default());
        assert!(r.converged());
        assert!((r.x[0].abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_start() {
        let r = maximize(&LogBarrier, &[-1.0], &NewtonOptions::default());
        assert_eq!(r.termination, Termination::InfeasibleStart);
    }

    #[test]
    fn unbounded_ray_is_not_converged() {
        let r = maximize(&NoMax, &[0.0], &NewtonOptions::default());
        assert!(!r.converged() || r.x[0] < -700.0, "{r:?}");
    }
}
