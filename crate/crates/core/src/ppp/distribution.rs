use std::cmp::Ordering;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::glm::BinaryDataset;
use crate::io::{read_numeric_csv, read_numeric_csv_path, NumericTable};
use crate::{Error, Result};

/// Tolerance used when matching event points to support points.
pub const MATCH_TOL: f64 = 1e-9;

/// A finitely supported covariate distribution `F = sum_j p_j delta_{xi_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateDistribution {
    /// Row-major `J x p`.
    support: Vec<f64>,
    weights: Vec<f64>,
    p: usize,
    /// Support indices sorted by the first coordinate.
    by_first: Vec<usize>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl CovariateDistribution {
    /// Validates and builds the distribution: positive weights summing to one
    /// within 1e-12, distinct points, and a support not contained in any
    /// hyperplane.
    pub fn new(support: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid_data("covariate distribution has an empty support"));
        }
        if support.len() != weights.len() {
            return Err(Error::invalid_data(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        let p = support[0].len();
        if p == 0 {
            return Err(Error::invalid_data("support points have no coordinates"));
        }
        if let Some((j, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid_data(format!("weight {j} is {w}, must be positive")));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_data(format!("weights sum to {total}, not 1")));
        }
        let mut flat = Vec::with_capacity(support.len() * p);
        for (j, row) in support.iter().enumerate() {
            if row.len() != p {
                return Err(Error::invalid_data(format!("support point {j} has {} coordinates, expected {p}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid_data(format!("support point {j} is not finite")));
            }
            flat.extend_from_slice(row);
        }

        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&support[a], &support[b]));
        if let Some(w) = order.windows(2).find(|w| lex_cmp(&support[w[0]], &support[w[1]]).is_eq()) {
            return Err(Error::invalid_data(format!("support points {} and {} coincide", w[0].min(w[1]), w[0].max(w[1]))));
        }

        let rank = affine_rank(&flat, p);
        if rank < p {
            return Err(Error::DegenerateSupport { rank, dim: p });
        }

        let mut by_first: Vec<usize> = (0..support.len()).collect();
        by_first.sort_by(|&a, &b| flat[a * p].total_cmp(&flat[b * p]));
        Ok(CovariateDistribution { support: flat, weights, p, by_first })
    }

    /// Uniform weights on the given points.
    pub fn uniform(support: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / support.len().max(1) as f64;
        let weights = vec![w; support.len()];
        Self::new(support, weights)
    }

    /// Empirical distribution of a collection of rows; repeated rows are merged
    /// and the support is sorted lexicographically.
    pub fn empirical<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut rows: Vec<&[f64]> = rows.into_iter().collect();
        if rows.is_empty() {
            return Err(Error::invalid_data("empirical distribution of an empty sample"));
        }
        let total = rows.len() as f64;
        rows.sort_by(|a, b| lex_cmp(a, b));
        let mut support: Vec<Vec<f64>> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for r in rows {
            match support.last() {
                Some(last) if lex_cmp(last, r).is_eq() => *counts.last_mut().unwrap() += 1,
                _ => {
                    support.push(r.to_vec());
                    counts.push(1);
                }
            }
        }
        let weights = counts.iter().map(|&c| c as f64 / total).collect();
        Self::new(support, weights)
    }

    /// Empirical distribution of all covariate rows of a dataset.
    pub fn from_dataset(data: &BinaryDataset) -> Result<Self> {
        Self::empirical(data.rows())
    }

    /// From a table whose last column is `weight` and whose other columns are covariates.
    pub fn from_table(table: &NumericTable) -> Result<Self> {
        let wc = table
            .column("weight")
            .ok_or_else(|| Error::invalid_data("CSV has no `weight` column"))?;
        let mut support = Vec::with_capacity(table.rows.len());
        let mut weights = Vec::with_capacity(table.rows.len());
        for r in &table.rows {
            weights.push(r[wc]);
            support.push(r.iter().enumerate().filter(|&(j, _)| j != wc).map(|(_, &v)| v).collect());
        }
        Self::new(support, weights)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        Self::from_table(&read_numeric_csv(reader)?)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_table(&read_numeric_csv_path(path)?)
    }

    /// Number of support points `J`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.support[j * self.p..(j + 1) * self.p]
    }

    pub(crate) fn support_flat(&self) -> &[f64] {
        &self.support
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.support.chunks_exact(self.p)
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the support point within [`MATCH_TOL`] of `x` (per coordinate,
    /// relative to the magnitude), preferring the closest one.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.p {
            return None;
        }
        let tol = |v: f64| MATCH_TOL * v.abs().max(1.0);
        let lo = x[0] - tol(x[0]);
        let start = self.by_first.partition_point(|&j| self.support[j * self.p] < lo);
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.by_first[start..] {
            let pt = self.point(j);
            if pt[0] > x[0] + tol(x[0]) {
                break;
            }
            let within = pt.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol(*b));
            if within {
                let dist = pt.iter().zip(x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                if best.is_none_or(|(_, d)| dist < d) {
                    best = Some((j, dist));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// CSV with columns `x1..xp,weight`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.p {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("weight\n");
        for j in 0..self.len() {
            for v in self.point(j) {
                out.push_str(&crate::io::fmt_f64(*v));
                out.push(',');
            }
            out.push_str(&crate::io::fmt_f64(self.weights[j]));
            out.push('\n');
        }
        out
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Rank of the rows of a row-major `n x p` matrix after centering.
pub(crate) fn affine_rank(flat: &[f64], p: usize) -> usize {
    let n = flat.len() / p;
    if n < 2 {
        return 0;
    }
    let mut mean = vec![0.0; p];
    for row in flat.chunks_exact(p) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    // the p x p scatter matrix has the same rank as the centered rows
    let mut scatter = DMatrix::<f64>::zeros(p, p);
    let mut scale = 0.0_f64;
    for row in flat.chunks_exact(p) {
        for a in 0..p {
            let da = row[a] - mean[a];
            scale = scale.max(da.abs());
            for b in 0..p {
                scatter[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    if scale == 0.0 {
        return 0;
    }
    let sv = scatter.singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&s| s > smax * 1e-12 * n as f64).count()
}

/// Event points `x_1..x_n`, each of which must lie in the support of `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSample {
    points: Vec<f64>,
    p: usize,
}

impl EventSample {
    pub fn new(points: Vec<Vec<f64>>, p: usize) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * p);
        for (i, row) in points.iter().enumerate() {
            if row.len() != p {
                return Err(Error::invalid_data(format!("event {i} has {} coordinates, expected {p}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid_data(format!("event {i} is not finite")));
            }
            flat.extend_from_slice(row);
        }
        Ok(EventSample { points: flat, p })
    }

    pub fn empty(p: usize) -> Self {
        EventSample { points: Vec::new(), p }
    }

    /// `counts[j]` copies of support point `j`.
    pub fn from_counts(dist: &CovariateDistribution, counts: &[u64]) -> Result<Self> {
        if counts.len() != dist.len() {
            return Err(Error::invalid_arg(format!("{} counts for {} support points", counts.len(), dist.len())));
        }
        let mut points = Vec::new();
        for (j, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                points.extend_from_slice(dist.point(j));
            }
        }
        Ok(EventSample { points, p: dist.dim() })
    }

    /// Covariates of the positive rows of a dataset.
    pub fn positives(data: &BinaryDataset) -> Self {
        let points = data.rows_with_label(true).flat_map(|r| r.iter().copied()).collect();
        EventSample { points, p: data.dim() }
    }

    /// Every column of the table is a covariate.
    pub fn from_table(table: &NumericTable) -> Result<Self> {
        Self::new(table.rows.clone(), table.headers.len())
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        Self::from_table(&read_numeric_csv(reader)?)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_table(&read_numeric_csv_path(path)?)
    }

    pub fn len(&self) -> usize {
        self.points.len().checked_div(self.p).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.p..(i + 1) * self.p]
    }

    /// Number of events at each support point of `dist`.
    pub fn counts(&self, dist: &CovariateDistribution) -> Result<Vec<u64>> {
        if !self.is_empty() && self.p != dist.dim() {
            return Err(Error::invalid_data(format!(
                "events have {} coordinates, support has {}",
                self.p,
                dist.dim()
            )));
        }
        let mut counts = vec![0u64; dist.len()];
        for i in 0..self.len() {
            let j = dist.locate(self.point(i)).ok_or(Error::PointOutsideSupport { index: i })?;
            counts[j] += 1;
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_weights_and_points() {
        assert!(CovariateDistribution::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).is_ok());
        assert!(CovariateDistribution::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.6]).is_err());
        assert!(CovariateDistribution::new(vec![vec![0.0], vec![1.0]], vec![1.0, 0.0]).is_err());
        assert!(CovariateDistribution::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn rejects_hyperplane_support() {
        let collinear = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let err = CovariateDistribution::uniform(collinear).unwrap_err();
        assert!(matches!(err, Error::DegenerateSupport { rank: 1, dim: 2 }));
        assert!(matches!(
            CovariateDistribution::uniform(vec![vec![3.0]]),
            Err(Error::DegenerateSupport { rank: 0, dim: 1 })
        ));
        let ok = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(CovariateDistribution::uniform(ok).is_ok());
    }

    #[test]
    fn empirical_merges_duplicates() {
        let rows = [[0.5], [0.0], [0.5], [1.0]];
        let f = CovariateDistribution::empirical(rows.iter().map(|r| &r[..])).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.point(1), [0.5]);
        assert_eq!(f.weights(), [0.25, 0.5, 0.25]);
    }

    #[test]
    fn events_matched_with_tolerance() {
        let f = CovariateDistribution::uniform(vec![vec![0.0, 0.0], vec![0.1, 1.0], vec![0.1, 2.0], vec![1.0, 0.0]]).unwrap();
        let ev = EventSample::new(vec![vec![0.1 + 1e-12, 2.0], vec![0.1, 1.0], vec![0.1, 1.0]], 2).unwrap();
        assert_eq!(ev.counts(&f).unwrap(), [0, 2, 1, 0]);
        let bad = EventSample::new(vec![vec![0.5, 0.5]], 2).unwrap();
        assert!(matches!(bad.counts(&f), Err(Error::PointOutsideSupport { index: 0 })));
    }

    #[test]
    fn csv_round_trip() {
        let f = CovariateDistribution::new(vec![vec![0.0], vec![0.3], vec![2.0]], vec![0.2, 0.3, 0.5]).unwrap();
        let back = CovariateDistribution::from_csv_reader(f.to_csv_string().as_bytes()).unwrap();
        assert_eq!(f, back);
    }
}
