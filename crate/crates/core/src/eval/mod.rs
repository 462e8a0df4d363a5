//! Cross-validated relation induction benchmark: datasets, folds, negative
//! sampling, threshold selection and metrics.

mod dataset;
mod diagnostics;
mod folds;
mod harness;
mod metrics;
mod negatives;

pub use dataset::{load_dataset, write_custom_tsv, DatasetOrigin, RelationDataset};
pub use diagnostics::{
    compute_diagnostics, export_diagnostics, pairs_path, write_pairs, write_rows, DiagnosticRow, Diagnostics,
    PairPoint, Role,
};
pub use folds::{validation_size, validation_split, EvaluationPlan, FoldSplit, VALIDATION_FRACTION};
pub use harness::{
    evaluate, evaluate_detailed, ConfigEcho, EvalConfig, Evaluation, EvaluationReport, FoldRecord, MacroAverages,
    ProvenanceCounts, RelationReport, SkippedRelation, ThresholdSource,
};
pub use metrics::{average_precision, f1_score, rank_labels, select_threshold, Confusion, ThresholdChoice};
pub use negatives::{generate_negatives, Label, LabeledPair, NegativeSet, Provenance};
