//! Deterministic designs, Monte Carlo checks of the Poisson limit and the
//! convergence experiments comparing binomial regression with the limiting
//! point-process fit.

mod convergence;
mod montecarlo;
mod sample;

pub use convergence::{
    fit_design_point_process, link_label, run_convergence_experiment, BaseMeasure, ConvergenceReport, ConvergenceRow,
    Estimate,
};
pub use montecarlo::{
    replication_rng, simulate_imbalanced, verify_poisson_limit, PoissonLimitReport, RegionPartition, RegionReport,
};
pub use sample::{generate_design_sample, DesignSpec};
