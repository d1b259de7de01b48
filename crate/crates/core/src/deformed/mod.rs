//! q-exponential special functions, link distributions and extreme-value
//! normalizing sequences.

pub mod link;
pub mod normalizing;
pub mod qexp;
pub mod root;
pub mod tlogistic;

pub use link::LinkFamily;
pub use normalizing::{normalizing_sequence, verify_gev, GevResidual, NormalizingTriple};
pub use qexp::{exp_q, exp_q_derivs, exp_q_m1, ln_exp_q, ln_exp_q_derivs, ln_q, QIndex};
pub use tlogistic::{t_logistic_cdf, t_logistic_gamma, t_logistic_point, TLogisticPoint};
