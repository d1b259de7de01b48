use nalgebra::{DMatrix, DVector};

use super::{BinaryDataset, RawCoefficients};
use crate::deformed::LinkFamily;
use crate::optim::Objective;

/// Binomial log-likelihood `sum_i [Y_i log G(eta_i) + (1 - Y_i) log(1 - G(eta_i))]`
/// with `eta_i = a + b'X_i`. Returns `-inf` when some term is `log 0`.
pub fn glm_log_likelihood(data: &BinaryDataset, family: &LinkFamily, coef: &RawCoefficients) -> f64 {
    GlmObjective::new(data, *family, 0.0).value(&coef.to_params())
}

/// Log-likelihood with its gradient and Hessian in `(a, b)`.
pub fn glm_log_likelihood_derivatives(
    data: &BinaryDataset,
    family: &LinkFamily,
    coef: &RawCoefficients,
) -> (f64, DVector<f64>, DMatrix<f64>) {
    GlmObjective::new(data, *family, 0.0).derivatives(&coef.to_params())
}

/// Log-likelihood plus the additive-smoothing penalty
/// `(kappa/m) sum_i log(m G(eta_i))`.
pub struct GlmObjective<'a> {
    data: &'a BinaryDataset,
    family: LinkFamily,
    kappa: f64,
}

impl<'a> GlmObjective<'a> {
    pub fn new(data: &'a BinaryDataset, family: LinkFamily, kappa: f64) -> Self {
        GlmObjective { data, family, kappa }
    }

    fn penalty_weight(&self) -> f64 {
        self.kappa / self.data.len() as f64
    }

    /// Weights on `log G` and `log(1 - G)` for row `i`.
    fn row_weights(&self, i: usize) -> (f64, f64) {
        let w = self.penalty_weight();
        if self.data.label(i) {
            (1.0 + w, 0.0)
        } else {
            (w, 1.0)
        }
    }

    fn eta(&self, theta: &[f64], x: &[f64]) -> f64 {
        theta[0] + theta[1..].iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
    }
}

impl Objective for GlmObjective<'_> {
    fn dim(&self) -> usize {
        self.data.dim() + 1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, x) in self.data.rows().enumerate() {
            let eta = self.eta(theta, x);
            let (wc, ws) = self.row_weights(i);
            if wc > 0.0 {
                total += wc * self.family.log_cdf(eta);
            }
            if ws > 0.0 {
                total += ws * self.family.log_sf(eta);
            }
            if total.is_nan() || total == f64::NEG_INFINITY {
                return total;
            }
        }
        if self.kappa > 0.0 {
            total += self.kappa * (self.data.len() as f64).ln();
        }
        total
    }

    fn derivatives(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let k = self.dim();
        let mut value = 0.0;
        let mut grad = DVector::zeros(k);
        let mut hess = DMatrix::zeros(k, k);
        let mut xt = vec![1.0; k];
        for (i, x) in self.data.rows().enumerate() {
            xt[1..].copy_from_slice(x);
            let eta = self.eta(theta, x);
            let (wc, ws) = self.row_weights(i);
            let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
            if wc > 0.0 {
                let [l, l1, l2] = self.family.log_cdf_derivs(eta);
                v += wc * l;
                d1 += wc * l1;
                d2 += wc * l2;
            }
            if ws > 0.0 {
                let [l, l1, l2] = self.family.log_sf_derivs(eta);
                v += ws * l;
                d1 += ws * l1;
                d2 += ws * l2;
            }
            value += v;
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
        if self.kappa > 0.0 {
            value += self.kappa * (self.data.len() as f64).ln();
        }
        (value, grad, hess)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_values() {
        let d = BinaryDataset::new(vec![vec![0.0]], vec![true]).unwrap();
        let ll = glm_log_likelihood(&d, &LinkFamily::Logistic, &RawCoefficients::new(0.0, vec![0.0]));
        assert!((ll - 0.5f64.ln()).abs() < 1e-15);

        let d = BinaryDataset::new(vec![vec![0.0], vec![0.0]], vec![true, false]).unwrap();
        let (v, g, _) = glm_log_likelihood_derivatives(&d, &LinkFamily::Logistic, &RawCoefficients::new(0.0, vec![0.3]));
        assert!((v - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!(g[0].abs() < 1e-15);
    }

    #[test]
    fn uniform_outside_support_is_minus_infinity() {
        let d = BinaryDataset::new(vec![vec![0.0], vec![1.0]], vec![true, false]).unwrap();
        let ll = glm_log_likelihood(&d, &LinkFamily::Uniform, &RawCoefficients::new(-1.5, vec![0.0]));
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn penalty_adds_log_m_g() {
        let d = BinaryDataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![true, false, false]).unwrap();
        let theta = [-0.4, 0.25];
        let base = GlmObjective::new(&d, LinkFamily::Normal, 0.0).value(&theta);
        let pen = GlmObjective::new(&d, LinkFamily::Normal, 0.6).value(&theta);
        let want: f64 = (0..3)
            .map(|i| (3.0 * LinkFamily::Normal.cdf(theta[0] + theta[1] * i as f64)).ln())
            .sum::<f64>()
            * 0.6
            / 3.0;
        assert!((pen - base - want).abs() < 1e-13);
    }
}
