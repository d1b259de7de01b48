//! Binomial regression `P(Y = 1 | x) = G(a + b'x)` under any [`LinkFamily`](crate::LinkFamily).

mod coefficients;
mod dataset;
mod fit;
mod likelihood;

pub use coefficients::{denormalize_coefficients, normalize_coefficients, NormalizedCoefficients, RawCoefficients};
pub use dataset::BinaryDataset;
pub use fit::{fit_glm, fit_glm_with, GlmFit, GlmOptions};
pub(crate) use fit::sign_pattern_starts;
pub use likelihood::{glm_log_likelihood, glm_log_likelihood_derivatives, GlmObjective};
