//! Comparison scorers: 3CosAvg, an LRCos variant that swaps the logistic
//! classifier for the Bayesian type factors, and a linear max-margin
//! classifier on difference vectors.

mod cosavg;
mod lrcos;
mod margin;

pub use cosavg::{cosine, score_3cosavg, ThreeCosAvgModel};
pub use lrcos::{score_lrcos, LrCosComponents, LrCosModel};
pub use margin::{
    assemble_margin_training, train_margin_classifier, ClassWeights, MarginClassifier, MarginConfig,
    MarginTrainingSet, C_GRID,
};
