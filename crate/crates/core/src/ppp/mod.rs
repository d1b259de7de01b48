//! Poisson point processes with q-exponential intensity `exp_q(alpha + beta'x) F(dx)`
//! on a finitely supported covariate distribution `F`.

mod distribution;
mod fit;
mod model;

pub use distribution::{CovariateDistribution, EventSample, MATCH_TOL};
pub use fit::{
    fit_additive_smoothing, fit_additive_smoothing_counts, fit_additive_smoothing_with, FitOptions, FitSummary,
    PointProcessFit,
};
pub use model::{
    penalized_objective, penalized_objective_with_gradient, point_process_log_likelihood, q_exponential_density,
    region_intensity, theta_contains, total_intensity, PenalizedObjective, PointProcessModel, ThetaMembership,
};
pub(crate) use fit::maximize_penalized;
