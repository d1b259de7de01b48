use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::distribution::{compensated_sum, CovariateDistribution, EventSample};
use crate::deformed::{exp_q, exp_q_derivs, ln_exp_q, ln_exp_q_derivs};
use crate::optim::Objective;
use crate::{Error, Result};

/// Membership of `(alpha, beta)` in the parameter space
/// `Theta = {1 + (1 - q)(alpha + beta'xi_j) > 0 for all j}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaMembership {
    pub inside: bool,
    /// `min_j [1 + (1 - q)(alpha + beta'xi_j)]`.
    pub margin: f64,
}

fn linear(alpha: f64, beta: &[f64], x: &[f64]) -> f64 {
    alpha + beta.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
}

pub fn theta_contains(q: f64, dist: &CovariateDistribution, alpha: f64, beta: &[f64]) -> ThetaMembership {
    let margin = dist
        .points()
        .map(|x| 1.0 + (1.0 - q) * linear(alpha, beta, x))
        .fold(f64::INFINITY, f64::min);
    ThetaMembership {
        inside: margin > 0.0,
        margin,
    }
}

/// The intensity measure `lambda(dx) = exp_q(alpha + beta'x) F(dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointProcessModel {
    q: f64,
    dist: CovariateDistribution,
    alpha: f64,
    beta: Vec<f64>,
}

impl PointProcessModel {
    /// Fails unless `(alpha, beta)` lies strictly inside `Theta`.
    pub fn new(q: f64, dist: CovariateDistribution, alpha: f64, beta: Vec<f64>) -> Result<Self> {
        if !q.is_finite() || !alpha.is_finite() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid_arg("q, alpha and beta must be finite"));
        }
        if beta.len() != dist.dim() {
            return Err(Error::invalid_arg(format!(
                "beta has {} entries, covariates have dimension {}",
                beta.len(),
                dist.dim()
            )));
        }
        let member = theta_contains(q, &dist, alpha, &beta);
        if !member.inside {
            return Err(Error::invalid_arg(format!(
                "(alpha, beta) is outside the parameter space (margin {:e})",
                member.margin
            )));
        }
        Ok(PointProcessModel { q, dist, alpha, beta })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn distribution(&self) -> &CovariateDistribution {
        &self.dist
    }

    pub fn margin(&self) -> f64 {
        theta_contains(self.q, &self.dist, self.alpha, &self.beta).margin
    }

    /// `exp_q(alpha + beta'xi_j)`.
    pub fn kernel(&self, j: usize) -> f64 {
        exp_q(linear(self.alpha, &self.beta, self.dist.point(j)), self.q)
    }

    /// `p_j exp_q(alpha + beta'xi_j)`, the intensity of the single point `xi_j`.
    pub fn point_intensity(&self, j: usize) -> f64 {
        self.dist.weight(j) * self.kernel(j)
    }

    /// `Lambda_q(alpha, beta) = sum_j p_j exp_q(alpha + beta'xi_j)`.
    pub fn total_intensity(&self) -> f64 {
        compensated_sum((0..self.dist.len()).map(|j| self.point_intensity(j)))
    }

    /// `lambda(A)` for a set of support indices.
    pub fn region_intensity(&self, region: &[usize]) -> Result<f64> {
        if let Some(&j) = region.iter().find(|&&j| j >= self.dist.len()) {
            return Err(Error::invalid_arg(format!("support index {j} out of range 0..{}", self.dist.len())));
        }
        Ok(compensated_sum(region.iter().map(|&j| self.point_intensity(j))))
    }

    /// `p_j exp_q(alpha + beta'xi_j) / Lambda_q`.
    pub fn density(&self, j: usize) -> f64 {
        self.point_intensity(j) / self.total_intensity()
    }

    /// Log-likelihood of the point process, `-Lambda + sum_i log exp_q(eta(x_i)) - log n!`.
    pub fn log_likelihood(&self, sample: &EventSample) -> Result<f64> {
        let counts = sample.counts(&self.dist)?;
        let n: u64 = counts.iter().sum();
        let mut ll = -self.total_intensity();
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                ll += c as f64 * ln_exp_q(linear(self.alpha, &self.beta, self.dist.point(j)), self.q);
            }
        }
        Ok(ll - ln_factorial(n))
    }
}

pub fn total_intensity(model: &PointProcessModel) -> f64 {
    model.total_intensity()
}

pub fn region_intensity(model: &PointProcessModel, region: &[usize]) -> Result<f64> {
    model.region_intensity(region)
}

pub fn q_exponential_density(model: &PointProcessModel, j: usize) -> f64 {
    model.density(j)
}

pub fn point_process_log_likelihood(model: &PointProcessModel, sample: &EventSample) -> Result<f64> {
    model.log_likelihood(sample)
}

fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// The penalized log-likelihood
/// `-Lambda_q + sum_i log exp_q(eta(x_i)) + kappa sum_j p_j log exp_q(eta(xi_j))`
/// written over points with base weights `p_j` and log weights `w_j = n_j + kappa p_j`.
#[derive(Debug, Clone)]
pub struct PenalizedObjective<'a> {
    q: f64,
    p: usize,
    /// Row-major points.
    points: Cow<'a, [f64]>,
    /// Base-measure weights `p_j`; zero for points carrying events only.
    base: Cow<'a, [f64]>,
    /// `n_j + kappa p_j`.
    weights: Vec<f64>,
}

impl<'a> PenalizedObjective<'a> {
    pub fn new(q: f64, dist: &'a CovariateDistribution, counts: &[u64], kappa: f64) -> Self {
        let weights = counts
            .iter()
            .zip(dist.weights())
            .map(|(&n, &p)| n as f64 + kappa * p)
            .collect();
        PenalizedObjective {
            q,
            p: dist.dim(),
            points: Cow::Borrowed(dist.support_flat()),
            base: Cow::Borrowed(dist.weights()),
            weights,
        }
    }

    /// Objective over arbitrary points: `base[j]` is the base-measure weight and
    /// `weights[j]` the coefficient of `log exp_q` at point `j`.
    pub(crate) fn from_parts(q: f64, p: usize, points: Vec<f64>, base: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(points.len(), p * base.len());
        debug_assert_eq!(base.len(), weights.len());
        PenalizedObjective {
            q,
            p,
            points: Cow::Owned(points),
            base: Cow::Owned(base),
            weights,
        }
    }

    pub fn from_sample(q: f64, dist: &'a CovariateDistribution, sample: &EventSample, kappa: f64) -> Result<Self> {
        Ok(Self::new(q, dist, &sample.counts(dist)?, kappa))
    }

    fn len(&self) -> usize {
        self.base.len()
    }

    fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.p..(j + 1) * self.p]
    }

    fn eta(&self, theta: &[f64], j: usize) -> f64 {
        linear(theta[0], &theta[1..], self.point(j))
    }

    /// Value and gradient only.
    pub fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let (v, g, _) = self.derivatives(theta);
        (v, g.iter().copied().collect())
    }
}

impl Objective for PenalizedObjective<'_> {
    fn dim(&self) -> usize {
        self.p + 1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        if self.q != 1.0 && self.margin(theta) <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let terms = (0..self.len()).map(|j| {
            let eta = self.eta(theta, j);
            let mut t = -self.base[j] * exp_q(eta, self.q);
            if self.weights[j] > 0.0 {
                t += self.weights[j] * ln_exp_q(eta, self.q);
            }
            t
        });
        let v = compensated_sum(terms);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    fn derivatives(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let k = self.dim();
        let mut grad = DVector::zeros(k);
        let mut hess = DMatrix::zeros(k, k);
        let mut xt = vec![1.0; k];
        for j in 0..self.len() {
            xt[1..].copy_from_slice(self.point(j));
            let eta = self.eta(theta, j);
            let p = self.base[j];
            let [_, e1, e2] = exp_q_derivs(eta, self.q);
            let (mut d1, mut d2) = (-p * e1, -p * e2);
            if self.weights[j] > 0.0 {
                let [_, l1, l2] = ln_exp_q_derivs(eta, self.q);
                d1 += self.weights[j] * l1;
                d2 += self.weights[j] * l2;
            }
            for r in 0..k {
                grad[r] += d1 * xt[r];
                for c in 0..=r {
                    hess[(r, c)] += d2 * xt[r] * xt[c];
                }
            }
        }
        for r in 0..k {
            for c in 0..r {
                hess[(c, r)] = hess[(r, c)];
            }
        }
        (self.value(theta), grad, hess)
    }

    fn margin(&self, theta: &[f64]) -> f64 {
        if self.q == 1.0 {
            return f64::INFINITY;
        }
        (0..self.len())
            .map(|j| 1.0 + (1.0 - self.q) * self.eta(theta, j))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Penalized log-likelihood at `(alpha, beta)`; `-inf` outside `Theta`.
pub fn penalized_objective(
    q: f64,
    dist: &CovariateDistribution,
    sample: &EventSample,
    kappa: f64,
    alpha: f64,
    beta: &[f64],
) -> Result<f64> {
    Ok(penalized_objective_with_gradient(q, dist, sample, kappa, alpha, beta)?.0)
}

/// Penalized log-likelihood and its gradient in `(alpha, beta)`.
pub fn penalized_objective_with_gradient(
    q: f64,
    dist: &CovariateDistribution,
    sample: &EventSample,
    kappa: f64,
    alpha: f64,
    beta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::invalid_arg(format!("kappa must be finite and nonnegative, got {kappa}")));
    }
    if beta.len() != dist.dim() {
        return Err(Error::invalid_arg("beta dimension does not match the covariates"));
    }
    let obj = PenalizedObjective::from_sample(q, dist, sample, kappa)?;
    let theta: Vec<f64> = std::iter::once(alpha).chain(beta.iter().copied()).collect();
    let value = obj.value(&theta);
    if !value.is_finite() {
        return Ok((value, vec![f64::NAN; theta.len()]));
    }
    Ok(obj.value_and_gradient(&theta))
}
