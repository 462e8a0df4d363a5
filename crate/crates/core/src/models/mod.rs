//! Per-relation scoring models.

mod persist;
mod regression;
mod translation;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use persist::{load_model, save_model, ModelDocument, MODEL_FORMAT_VERSION};
pub use regression::{default_rank, fit_regression, score_regression, RegressionRelationModel};
pub use translation::{fit_translation, score_translation, TranslationRelationModel};

use crate::baselines::{LrCosModel, MarginClassifier, MarginConfig, ThreeCosAvgModel};
use crate::bayes::UnivariatePredictive;
use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::pair::WordPair;

/// Additive decomposition of a log score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub source_type_lbf: f64,
    pub target_type_lbf: f64,
    pub relation_lbf: f64,
    pub total: f64,
}

impl ScoreBreakdown {
    pub fn new(source_type_lbf: f64, target_type_lbf: f64, relation_lbf: f64) -> Self {
        ScoreBreakdown {
            source_type_lbf,
            target_type_lbf,
            relation_lbf,
            total: source_type_lbf + target_type_lbf + relation_lbf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "translation")]
    Translation,
    #[serde(rename = "regression")]
    Regression,
    #[serde(rename = "3cosavg")]
    ThreeCosAvg,
    #[serde(rename = "lrcos")]
    LrCos,
    #[serde(rename = "margin")]
    Margin,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Translation,
        ModelKind::Regression,
        ModelKind::ThreeCosAvg,
        ModelKind::LrCos,
        ModelKind::Margin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Translation => "translation",
            ModelKind::Regression => "regression",
            ModelKind::ThreeCosAvg => "3cosavg",
            ModelKind::LrCos => "lrcos",
            ModelKind::Margin => "margin",
        }
    }

    /// Fewest training pairs the model can be fitted on.
    pub fn min_pairs(self) -> usize {
        match self {
            ModelKind::Regression => 4,
            ModelKind::ThreeCosAvg => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidArgument(format!("unknown model kind `{s}` (valid: {})", names.join(", ")))
            })
    }
}

/// Per-coordinate source and target predictives that gate word types.
#[derive(Debug, Clone, PartialEq)]
pub struct TypePredictives {
    pub source: Vec<UnivariatePredictive>,
    pub target: Vec<UnivariatePredictive>,
}

impl TypePredictives {
    pub fn fit(sources: &[&[f64]], targets: &[&[f64]]) -> Result<Self> {
        Ok(TypePredictives {
            source: fit_columns(sources)?,
            target: fit_columns(targets)?,
        })
    }

    /// `log f(p_s | source type) - log f(p_s)`.
    pub fn source_lbf(&self, emb: &WordEmbedding, v: &[f64]) -> f64 {
        type_log_bayes_factor(&self.source, emb, v)
    }

    pub fn target_lbf(&self, emb: &WordEmbedding, v: &[f64]) -> f64 {
        type_log_bayes_factor(&self.target, emb, v)
    }
}

/// One predictive per coordinate fitted over the given vectors.
pub fn fit_columns(vectors: &[&[f64]]) -> Result<Vec<UnivariatePredictive>> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 vectors, got {n}")));
    }
    let m = vectors[0].len();
    let mut column = vec![0.0; n];
    (0..m)
        .map(|i| {
            for (c, v) in column.iter_mut().zip(vectors) {
                *c = v[i];
            }
            UnivariatePredictive::fit(&column)
        })
        .collect()
}

pub fn type_log_bayes_factor(preds: &[UnivariatePredictive], emb: &WordEmbedding, v: &[f64]) -> f64 {
    let conditioned: f64 = preds.iter().zip(v).map(|(p, x)| p.logpdf(*x)).sum();
    conditioned - emb.background_logpdf(v)
}

pub(crate) type SourceTargetVectors<'e> = (Vec<&'e [f64]>, Vec<&'e [f64]>);

/// Looks up both sides of every pair, reporting all missing words at once.
pub(crate) fn pair_vectors<'e>(emb: &'e WordEmbedding, pairs: &[WordPair]) -> Result<SourceTargetVectors<'e>> {
    let words = pairs.iter().flat_map(|p| [p.source.as_str(), p.target.as_str()]);
    let all = emb.lookup_all(words)?;
    let (mut s, mut t) = (Vec::with_capacity(pairs.len()), Vec::with_capacity(pairs.len()));
    for chunk in all.chunks_exact(2) {
        s.push(chunk[0]);
        t.push(chunk[1]);
    }
    Ok((s, t))
}

/// How a fitted model is obtained for a given kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub seed: u64,
    pub k_override: Option<usize>,
    pub margin: MarginConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            seed: 42,
            k_override: None,
            margin: MarginConfig::default(),
        }
    }
}

/// Any of the five scorers, fitted for one relation.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Translation(TranslationRelationModel),
    Regression(RegressionRelationModel),
    ThreeCosAvg(ThreeCosAvgModel),
    LrCos(LrCosModel),
    Margin(MarginClassifier),
}

/// Score of one candidate pair; `breakdown` is present for the log
/// Bayes-factor models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub total: f64,
    pub breakdown: Option<ScoreBreakdown>,
}

impl FittedModel {
    pub fn fit(kind: ModelKind, emb: &WordEmbedding, pairs: &[WordPair], opts: &FitOptions) -> Result<Self> {
        Ok(match kind {
            ModelKind::Translation => FittedModel::Translation(TranslationRelationModel::fit(emb, pairs, opts.seed)?),
            ModelKind::Regression => {
                FittedModel::Regression(RegressionRelationModel::fit(emb, pairs, opts.k_override)?)
            }
            ModelKind::ThreeCosAvg => FittedModel::ThreeCosAvg(ThreeCosAvgModel::fit(emb, pairs)?),
            ModelKind::LrCos => FittedModel::LrCos(LrCosModel::fit(emb, pairs)?),
            ModelKind::Margin => FittedModel::Margin(MarginClassifier::fit_pairs(emb, pairs, opts.seed, &opts.margin)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Translation(_) => ModelKind::Translation,
            FittedModel::Regression(_) => ModelKind::Regression,
            FittedModel::ThreeCosAvg(_) => ModelKind::ThreeCosAvg,
            FittedModel::LrCos(_) => ModelKind::LrCos,
            FittedModel::Margin(_) => ModelKind::Margin,
        }
    }

    pub fn score(&self, emb: &WordEmbedding, source: &str, target: &str) -> Result<PairScore> {
        let v = emb.lookup_all([source, target])?;
        self.score_vectors(emb, v[0], v[1])
    }

    /// Raw model output for a pair of vectors.
    pub fn score_vectors(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> Result<PairScore> {
        let with = |b: ScoreBreakdown| PairScore {
            total: b.total,
            breakdown: Some(b),
        };
        let plain = |total: f64| PairScore { total, breakdown: None };
        Ok(match self {
            FittedModel::Translation(m) => with(m.score_vectors(emb, ps, pt)),
            FittedModel::Regression(m) => with(m.score_vectors(emb, ps, pt)),
            FittedModel::ThreeCosAvg(m) => plain(m.score_vectors(ps, pt)?),
            FittedModel::LrCos(m) => plain(m.score_vectors(emb, ps, pt)?),
            FittedModel::Margin(m) => plain(m.score_vectors(ps, pt)),
        })
    }

    /// A score whose order matches [`FittedModel::score_vectors`] and which is
    /// always finite, for ranking and threshold selection.
    pub fn ranking_score(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> Result<f64> {
        match self {
            FittedModel::LrCos(m) => m.ranking_score(emb, ps, pt),
            other => other.score_vectors(emb, ps, pt).map(|s| s.total),
        }
    }
}
