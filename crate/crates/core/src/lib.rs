//! Relation induction over word embeddings.
//!
//! Given a word embedding and example `(source, target)` pairs of a relation,
//! the models in this crate score unseen pairs by how plausibly they
//! instantiate the same relation:
//!
//! * [`models::TranslationRelationModel`] treats the relation as a
//!   distribution over translation vectors `p_t - p_s`, with type-gating
//!   Bayes factors for the source and target words.
//! * [`models::RegressionRelationModel`] only assumes a linear map from a
//!   low-rank source subspace to the target coordinates, fitted as a Bayesian
//!   linear regression.
//!
//! Both produce log Bayes-factor scores built from closed-form Student-t
//! posterior predictives (see [`bayes`]). The [`baselines`] module holds the
//! 3CosAvg, LRCos-style and linear margin classifier comparisons and
//! [`eval`] runs the cross-validated benchmark protocol over them.

pub mod baselines;
pub mod bayes;
pub mod embedding;
mod error;
pub mod eval;
pub mod jsonfmt;
pub mod models;
mod pair;
pub mod rng;
pub mod synthetic;

pub use embedding::{BackgroundGaussian, EmbeddingFormat, WordEmbedding};
pub use error::{Error, Result};
pub use models::{FittedModel, ModelKind, ScoreBreakdown};
pub use pair::WordPair;
