//! Simulation from the imbalanced binomial model and Monte Carlo checks of
//! its Poisson point-process limit.
//!
//! Replication `r` of a run with seed `s` draws from `ChaCha8Rng` seeded with
//! `s` on stream `r`, so results do not depend on thread scheduling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::deformed::{exp_q, normalizing_sequence, LinkFamily};
use crate::glm::BinaryDataset;
use crate::ppp::CovariateDistribution;
use crate::{Error, Result};

/// The generator for replication `stream` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn linear(alpha: f64, beta: &[f64], x: &[f64]) -> f64 {
    alpha + beta.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
}

fn check_params(family: &LinkFamily, dist: &CovariateDistribution, alpha: f64, beta: &[f64], m: u64) -> Result<()> {
    if beta.len() != dist.dim() {
        return Err(Error::invalid_arg(format!(
            "beta has {} entries, covariates have dimension {}",
            beta.len(),
            dist.dim()
        )));
    }
    if m < 2 {
        return Err(Error::invalid_arg("m must be at least 2"));
    }
    let q = family.tail_index();
    if let Some(x) = dist.points().find(|x| !exp_q(linear(alpha, beta, x), q).is_finite()) {
        return Err(Error::invalid_arg(format!("exp_q(alpha + beta'x) is infinite at x = {x:?}")));
    }
    Ok(())
}

/// `P(Y = 1 | X = xi_j)` under `G(a_m + b_m'xi_j)` with `a_m = c_m + d_m alpha`, `b_m = d_m beta`.
fn positive_probabilities(
    family: &LinkFamily,
    dist: &CovariateDistribution,
    alpha: f64,
    beta: &[f64],
    m: u64,
) -> Result<Vec<f64>> {
    let t = normalizing_sequence(family, m)?;
    Ok(dist
        .points()
        .map(|x| family.cdf(t.c + t.d * linear(alpha, beta, x)))
        .collect())
}

/// Draws `m` rows with `X_i ~ F` and `Y_i ~ Bernoulli(G(a_m + b_m'X_i))`.
pub fn simulate_imbalanced(
    family: &LinkFamily,
    dist: &CovariateDistribution,
    alpha: f64,
    beta: &[f64],
    m: u64,
    seed: u64,
) -> Result<BinaryDataset> {
    check_params(family, dist, alpha, beta, m)?;
    let probs = positive_probabilities(family, dist, alpha, beta, m)?;
    let index = WeightedIndex::new(dist.weights()).map_err(|e| Error::invalid_arg(e.to_string()))?;
    let mut rng = replication_rng(seed, 0);
    let mut rows = Vec::with_capacity(m as usize);
    let mut labels = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let j = index.sample(&mut rng);
        let u: f64 = rng.random();
        rows.push(dist.point(j).to_vec());
        labels.push(u < probs[j]);
    }
    BinaryDataset::new(rows, labels)
}

/// Mutually disjoint, nonempty sets of support indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionPartition {
    regions: Vec<Vec<usize>>,
}

impl RegionPartition {
    pub fn new(regions: Vec<Vec<usize>>, support_len: usize) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid_arg("at least one region is required"));
        }
        let mut seen = vec![false; support_len];
        for (r, reg) in regions.iter().enumerate() {
            if reg.is_empty() {
                return Err(Error::invalid_arg(format!("region {r} is empty")));
            }
            for &j in reg {
                if j >= support_len {
                    return Err(Error::invalid_arg(format!("region {r}: index {j} out of range 0..{support_len}")));
                }
                if seen[j] {
                    return Err(Error::invalid_arg(format!("support index {j} belongs to more than one region")));
                }
                seen[j] = true;
            }
        }
        Ok(RegionPartition { regions })
    }

    /// The first `ceil(J/2)` support indices and the rest (a single region when `J = 1`).
    pub fn halves(support_len: usize) -> Result<Self> {
        let mid = support_len.div_ceil(2);
        let mut regions = vec![(0..mid).collect::<Vec<_>>()];
        if mid < support_len {
            regions.push((mid..support_len).collect());
        }
        Self::new(regions, support_len)
    }

    /// The whole support as one region.
    pub fn whole(support_len: usize) -> Result<Self> {
        Self::new(vec![(0..support_len).collect()], support_len)
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub indices: Vec<usize>,
    /// Limiting Poisson mean `lambda(A)`.
    pub lambda: f64,
    /// Exact finite-`m` mean `m P(Y = 1, X in A)`.
    pub expected_count: f64,
    pub mean_count: f64,
    pub variance: f64,
    /// Empirical frequencies of counts `0, 1, ..., max observed`.
    pub empirical_pmf: Vec<f64>,
    /// `Poisson(lambda)` probabilities on the same range.
    pub poisson_pmf: Vec<f64>,
    /// Total-variation distance, including the Poisson mass beyond the range.
    pub tv_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonLimitReport {
    pub link: LinkFamily,
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub m: u64,
    pub replications: usize,
    pub seed: u64,
    pub regions: Vec<RegionReport>,
    /// Empirical correlation of region counts; entries involving a region
    /// whose count never varies are reported as 0 (1 on the diagonal).
    pub correlation: Vec<Vec<f64>>,
}

impl PoissonLimitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn max_tv_distance(&self) -> f64 {
        self.regions.iter().map(|r| r.tv_distance).fold(0.0, f64::max)
    }

    pub fn max_abs_cross_correlation(&self) -> f64 {
        let k = self.correlation.len();
        (0..k)
            .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| self.correlation[a][b].abs())
            .fold(0.0, f64::max)
    }
}

fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (-lambda + k * lambda.ln() - ln_gamma(k + 1.0)).exp()
}

/// Simulates `replications` independent datasets of size `m` and tabulates the
/// number of positives falling in each region against the Poisson limit.
///
/// Region counts of one dataset are multinomial over the regions and their
/// complement, which is drawn exactly by sequential conditional binomials
/// instead of materializing `m` rows.
#[allow(clippy::too_many_arguments)]
pub fn verify_poisson_limit(
    family: &LinkFamily,
    dist: &CovariateDistribution,
    alpha: f64,
    beta: &[f64],
    partition: &RegionPartition,
    m: u64,
    replications: usize,
    seed: u64,
) -> Result<PoissonLimitReport> {
    check_params(family, dist, alpha, beta, m)?;
    if replications == 0 {
        return Err(Error::invalid_arg("replications must be positive"));
    }
    if let Some(&j) = partition.regions().iter().flatten().find(|&&j| j >= dist.len()) {
        return Err(Error::invalid_arg(format!("region index {j} out of range for the support")));
    }
    let probs = positive_probabilities(family, dist, alpha, beta, m)?;
    let q = family.tail_index();

    let cell_probs: Vec<f64> = partition
        .regions()
        .iter()
        .map(|reg| reg.iter().map(|&j| dist.weight(j) * probs[j]).sum())
        .collect();
    let lambdas: Vec<f64> = partition
        .regions()
        .iter()
        .map(|reg| reg.iter().map(|&j| dist.weight(j) * exp_q(linear(alpha, beta, dist.point(j)), q)).sum())
        .collect();

    let k = partition.len();
    let counts: Vec<Vec<u64>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep as u64);
            let mut remaining_n = m;
            let mut remaining_p = 1.0_f64;
            let mut out = Vec::with_capacity(k);
            for &pc in &cell_probs {
                let c = if remaining_n == 0 || pc <= 0.0 {
                    0
                } else {
                    let ratio = (pc / remaining_p).clamp(0.0, 1.0);
                    Binomial::new(remaining_n, ratio).map(|b| b.sample(&mut rng)).unwrap_or(0)
                };
                out.push(c);
                remaining_n -= c;
                remaining_p = (remaining_p - pc).max(0.0);
            }
            out
        })
        .collect();

    let reps = replications as f64;
    let mut regions = Vec::with_capacity(k);
    let mut means = vec![0.0; k];
    for r in 0..k {
        let max = counts.iter().map(|c| c[r]).max().unwrap_or(0) as usize;
        let mut freq = vec![0.0; max + 1];
        for c in &counts {
            freq[c[r] as usize] += 1.0;
        }
        freq.iter_mut().for_each(|f| *f /= reps);
        let mean = counts.iter().map(|c| c[r] as f64).sum::<f64>() / reps;
        let var = counts.iter().map(|c| (c[r] as f64 - mean).powi(2)).sum::<f64>() / reps;
        let pois: Vec<f64> = (0..=max).map(|x| poisson_pmf(lambdas[r], x)).collect();
        let covered: f64 = pois.iter().sum();
        let tv = 0.5 * (freq.iter().zip(&pois).map(|(a, b)| (a - b).abs()).sum::<f64>() + (1.0 - covered).max(0.0));
        means[r] = mean;
        regions.push(RegionReport {
            indices: partition.regions()[r].clone(),
            lambda: lambdas[r],
            expected_count: m as f64 * cell_probs[r],
            mean_count: mean,
            variance: var,
            empirical_pmf: freq,
            poisson_pmf: pois,
            tv_distance: tv,
        });
    }

    let mut correlation = vec![vec![0.0; k]; k];
    for a in 0..k {
        correlation[a][a] = 1.0;
        for b in 0..a {
            let cov = counts
                .iter()
                .map(|c| (c[a] as f64 - means[a]) * (c[b] as f64 - means[b]))
                .sum::<f64>()
                / reps;
            let denom = (regions[a].variance * regions[b].variance).sqrt();
            let rho = if denom > 0.0 { cov / denom } else { 0.0 };
            correlation[a][b] = rho;
            correlation[b][a] = rho;
        }
    }

    Ok(PoissonLimitReport {
        link: *family,
        alpha,
        beta: beta.to_vec(),
        m,
        replications,
        seed,
        regions,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(j: usize) -> CovariateDistribution {
        CovariateDistribution::uniform((0..j).map(|i| vec![i as f64 / (j - 1) as f64]).collect()).unwrap()
    }

    #[test]
    fn partitions() {
        let p = RegionPartition::halves(5).unwrap();
        assert_eq!(p.regions(), [vec![0, 1, 2], vec![3, 4]]);
        assert!(RegionPartition::new(vec![vec![0, 1], vec![1]], 3).is_err());
        assert!(RegionPartition::new(vec![vec![]], 3).is_err());
        assert!(RegionPartition::new(vec![vec![3]], 3).is_err());
    }

    #[test]
    fn simulation_is_seeded() {
        let f = grid(4);
        let a = simulate_imbalanced(&LinkFamily::Logistic, &f, 2.0, &[1.0], 2_000, 11).unwrap();
        let b = simulate_imbalanced(&LinkFamily::Logistic, &f, 2.0, &[1.0], 2_000, 11).unwrap();
        let c = simulate_imbalanced(&LinkFamily::Logistic, &f, 2.0, &[1.0], 2_000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_intensity_region_has_zero_counts() {
        // uniform link: G vanishes below the support, so the low half never fires
        let f = grid(4);
        let part = RegionPartition::halves(4).unwrap();
        let rep = verify_poisson_limit(&LinkFamily::Uniform, &f, -2.0, &[2.0], &part, 1000, 200, 3).unwrap();
        assert_eq!(rep.regions[0].lambda, 0.0);
        assert_eq!(rep.regions[0].empirical_pmf, [1.0]);
        assert_eq!(rep.regions[0].tv_distance, 0.0);
    }

    #[test]
    fn report_is_deterministic() {
        let f = grid(6);
        let part = RegionPartition::halves(6).unwrap();
        let a = verify_poisson_limit(&LinkFamily::Logistic, &f, 0.0, &[0.0], &part, 10_000, 500, 7).unwrap();
        let b = verify_poisson_limit(&LinkFamily::Logistic, &f, 0.0, &[0.0], &part, 10_000, 500, 7).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn rejects_infinite_intensity() {
        let f = grid(3);
        assert!(simulate_imbalanced(&LinkFamily::Cauchy, &f, 1.0, &[0.0], 100, 1).is_err());
    }
}
