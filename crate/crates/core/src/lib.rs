//! Binomial regression under imbalanced asymptotics.
//!
//! When the number of positive responses stays bounded while the sample size
//! grows, binomial regression with a suitably rescaled intercept and slope
//! converges to a Poisson point process whose intensity is a q-exponential
//! family `exp_q(alpha + beta'x) F(dx)`. This crate provides:
//!
//! * [`deformed`]: the q-exponential function, the link distributions
//!   (logistic, Gumbel, normal, Cauchy, uniform, t-logistic) and their
//!   extreme-value normalizing sequences;
//! * [`glm`]: maximum-likelihood and penalized fitting of the binomial model;
//! * [`ppp`]: the point-process model on a finite covariate distribution and
//!   its additive-smoothing estimator;
//! * [`simlab`]: deterministic samples, Monte Carlo checks of the Poisson
//!   limit and the GLM-vs-point-process convergence experiments;
//! * [`cli`]: the `imbal` command-line front end.

pub mod cli;
pub mod deformed;
pub mod error;
pub mod glm;
pub mod io;
pub mod optim;
pub mod ppp;
pub mod simlab;

pub use deformed::{exp_q, ln_exp_q, LinkFamily, NormalizingTriple, QIndex};
pub use error::{Error, Result};
pub use glm::{BinaryDataset, GlmFit, NormalizedCoefficients, RawCoefficients};
pub use ppp::{CovariateDistribution, EventSample, PointProcessFit, PointProcessModel};
