use std::io::Read;
use std::path::Path;

use crate::io::{read_numeric_csv, read_numeric_csv_path, NumericTable};
use crate::{Error, Result};

/// Covariate rows `X_i` in `R^p` with binary labels `Y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    /// Row-major `m x p`.
    x: Vec<f64>,
    y: Vec<bool>,
    p: usize,
}

impl BinaryDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_data("dataset has no rows"));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid_data(format!(
                "{} covariate rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::invalid_data("dataset has no covariate columns"));
        }
        let mut x = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::invalid_data(format!("row {i} has {} covariates, expected {p}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid_data(format!("row {i} has non-finite covariate {v}")));
            }
            x.extend_from_slice(row);
        }
        Ok(BinaryDataset { x, y: labels, p })
    }

    /// Builds from a table with a `y` column (0/1) and covariates in the other columns.
    pub fn from_table(table: &NumericTable) -> Result<Self> {
        let yc = table
            .column("y")
            .ok_or_else(|| Error::invalid_data("CSV has no `y` column"))?;
        let mut rows = Vec::with_capacity(table.rows.len());
        let mut labels = Vec::with_capacity(table.rows.len());
        for (i, r) in table.rows.iter().enumerate() {
            let label = match r[yc] {
                0.0 => false,
                1.0 => true,
                v => return Err(Error::invalid_data(format!("row {}: label {v} is not 0 or 1", i + 1))),
            };
            labels.push(label);
            rows.push(r.iter().enumerate().filter(|&(j, _)| j != yc).map(|(_, &v)| v).collect());
        }
        Self::new(rows, labels)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        Self::from_table(&read_numeric_csv(reader)?)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_table(&read_numeric_csv_path(path)?)
    }

    /// CSV with columns `x1..xp,y`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.p {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("y\n");
        for i in 0..self.len() {
            for v in self.row(i) {
                out.push_str(&crate::io::fmt_f64(*v));
                out.push(',');
            }
            out.push_str(if self.y[i] { "1\n" } else { "0\n" });
        }
        out
    }

    /// Number of rows `m`.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Number of covariates `p`.
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn label(&self, i: usize) -> bool {
        self.y[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.y
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.p)
    }

    pub fn count_ones(&self) -> usize {
        self.y.iter().filter(|&&v| v).count()
    }

    pub fn mean_label(&self) -> f64 {
        self.count_ones() as f64 / self.len() as f64
    }

    /// Covariate rows with the given label.
    pub fn rows_with_label(&self, label: bool) -> impl Iterator<Item = &[f64]> {
        self.rows().zip(&self.y).filter(move |(_, &y)| y == label).map(|(r, _)| r)
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        let ones = self.count_ones();
        let zeros = self.len() - ones;
        if ones == 0 || zeros == 0 {
            return Err(Error::SingleClass { ones, zeros });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let d = BinaryDataset::new(vec![vec![0.1, 2.0], vec![-3.5, 1e-7]], vec![true, false]).unwrap();
        let back = BinaryDataset::from_csv_reader(d.to_csv_string().as_bytes()).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn label_column_anywhere() {
        let d = BinaryDataset::from_csv_reader("y,a,b\n1,0.5,2\n0,1,3\n".as_bytes()).unwrap();
        assert_eq!(d.row(1), [1.0, 3.0]);
        assert!(d.label(0));
    }

    #[test]
    fn rejects_bad_labels_and_shapes() {
        assert!(BinaryDataset::from_csv_reader("x,y\n0.5,2\n".as_bytes()).is_err());
        assert!(BinaryDataset::from_csv_reader("x,z\n0.5,1\n".as_bytes()).is_err());
        assert!(BinaryDataset::new(vec![vec![1.0], vec![]], vec![true, false]).is_err());
        assert!(BinaryDataset::new(vec![], vec![]).is_err());
    }

    #[test]
    fn single_class_detected() {
        let d = BinaryDataset::new(vec![vec![0.0], vec![1.0]], vec![true, true]).unwrap();
        assert!(matches!(d.require_both_classes(), Err(Error::SingleClass { ones: 2, zeros: 0 })));
    }
}
