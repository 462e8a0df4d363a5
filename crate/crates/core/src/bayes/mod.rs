//! Closed-form Bayesian building blocks.
//!
//! Everything here is a flat-prior posterior predictive that reduces to a
//! location-scale Student-t:
//!
//! * [`UnivariatePredictive`]: one coordinate with unknown mean and variance,
//!   `t_{n-1}(mean, (n+1) SS / (n (n-1)))`.
//! * [`BayesRegressionPredictive`]: one target coordinate regressed on a
//!   low-rank projection of the source vector, `t_{n-k-1}(p* b, s0^2 (1 + p*' (X'X)^-1 p*))`.
//!
//! All densities are returned in log space.

mod lowrank;
mod regression;
mod student_t;
mod univariate;

pub use lowrank::{fit_low_rank_basis, project, LowRankBasis};
pub use regression::{fit_bayes_regression, regression_predictive_logpdf, BayesRegressionPredictive, RegressionDesign};
pub use student_t::student_t_logpdf;
pub use univariate::{fit_univariate_predictive, predictive_logpdf, variance_floor, UnivariatePredictive};
