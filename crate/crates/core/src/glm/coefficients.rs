use serde::{Deserialize, Serialize};

use crate::deformed::NormalizingTriple;

/// Intercept `a` and slopes `b` of `P(Y = 1 | x) = G(a + b'x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCoefficients {
    pub a: f64,
    pub b: Vec<f64>,
}

/// Coefficients on the rescaled `(alpha, beta)` scale, where
/// `a = c_m + d_m alpha` and `b = d_m beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCoefficients {
    pub alpha: f64,
    pub beta: Vec<f64>,
}

impl RawCoefficients {
    pub fn new(a: f64, b: Vec<f64>) -> Self {
        RawCoefficients { a, b }
    }

    /// From the optimizer's parameter vector `(a, b_1, ..., b_p)`.
    pub fn from_params(theta: &[f64]) -> Self {
        RawCoefficients { a: theta[0], b: theta[1..].to_vec() }
    }

    pub fn to_params(&self) -> Vec<f64> {
        std::iter::once(self.a).chain(self.b.iter().copied()).collect()
    }

    /// `a + b'x`.
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.a + self.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
    }
}

pub fn normalize_coefficients(coef: &RawCoefficients, triple: &NormalizingTriple) -> NormalizedCoefficients {
    NormalizedCoefficients {
        alpha: (coef.a - triple.c) / triple.d,
        beta: coef.b.iter().map(|b| b / triple.d).collect(),
    }
}

pub fn denormalize_coefficients(coef: &NormalizedCoefficients, triple: &NormalizingTriple) -> RawCoefficients {
    RawCoefficients {
        a: triple.c + triple.d * coef.alpha,
        b: coef.beta.iter().map(|b| triple.d * b).collect(),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::deformed::{normalizing_sequence, LinkFamily};

    #[test]
    fn origin_maps_to_location() {
        let t = normalizing_sequence(&LinkFamily::Logistic, 500).unwrap();
        let n = normalize_coefficients(&RawCoefficients::new(t.c, vec![0.0]), &t);
        assert_eq!(n, NormalizedCoefficients { alpha: 0.0, beta: vec![0.0] });
    }

    #[test]
    fn logistic_and_cauchy_arithmetic() {
        let t = normalizing_sequence(&LinkFamily::Logistic, 1000).unwrap();
        let n = normalize_coefficients(&RawCoefficients::new(-(1000f64.ln()) + 1.5, vec![0.7]), &t);
        assert!((n.alpha - 1.5).abs() < 1e-14 && (n.beta[0] - 0.7).abs() < 1e-15);

        let t = normalizing_sequence(&LinkFamily::Cauchy, 100).unwrap();
        let s = 100.0 / PI;
        let n = normalize_coefficients(&RawCoefficients::new(-s + s * 0.9, vec![s * 0.05]), &t);
        assert!((n.alpha - 0.9).abs() < 1e-14 && (n.beta[0] - 0.05).abs() < 1e-15);
    }
}
