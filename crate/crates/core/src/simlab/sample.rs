use serde::{Deserialize, Serialize};

use crate::glm::BinaryDataset;
use crate::{Error, Result};

/// The deterministic one-covariate design with `n` positives spread evenly
/// over `[0.4, 0.8]` and `m - n` controls spread evenly over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n: usize,
    pub m: usize,
}

impl DesignSpec {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let spec = DesignSpec { n, m };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid_arg(format!("sample needs n >= 2 positives, got {}", self.n)));
        }
        if self.m < self.n + 2 {
            return Err(Error::invalid_arg(format!("sample needs m >= n + 2, got n = {}, m = {}", self.n, self.m)));
        }
        Ok(())
    }

    /// Covariate of the `i`-th positive, `0 <= i < n`.
    pub fn positive(&self, i: usize) -> f64 {
        0.4 + 0.4 * i as f64 / (self.n - 1) as f64
    }

    /// Covariate of the `k`-th control, `0 <= k < m - n`.
    pub fn control(&self, k: usize) -> f64 {
        k as f64 / (self.m - self.n - 1) as f64
    }
}

/// Rows `1..=n` are the positives, rows `n+1..=m` the controls.
pub fn generate_design_sample(spec: DesignSpec) -> Result<BinaryDataset> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.m);
    let mut labels = Vec::with_capacity(spec.m);
    for i in 0..spec.n {
        rows.push(vec![spec.positive(i)]);
        labels.push(true);
    }
    for k in 0..spec.m - spec.n {
        rows.push(vec![spec.control(k)]);
        labels.push(false);
    }
    BinaryDataset::new(rows, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let d = generate_design_sample(DesignSpec::new(10, 100).unwrap()).unwrap();
        assert_eq!(d.row(0), [0.4]);
        assert_eq!(d.row(9), [0.8]);
        assert_eq!(d.row(10), [0.0]);
        assert_eq!(d.row(99), [1.0]);
        assert_eq!(d.count_ones(), 10);
    }

    #[test]
    fn smallest_design() {
        let d = generate_design_sample(DesignSpec::new(2, 4).unwrap()).unwrap();
        let xs: Vec<f64> = d.rows().map(|r| r[0]).collect();
        assert_eq!(xs, [0.4, 0.8, 0.0, 1.0]);
        assert_eq!(d.labels(), [true, true, false, false]);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(DesignSpec::new(1, 10).is_err());
        assert!(DesignSpec::new(10, 11).is_err());
    }
}
