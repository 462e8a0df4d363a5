use rand::RngExt;

use super::{pair_vectors, ScoreBreakdown, TypePredictives};
use crate::bayes::UnivariatePredictive;
use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::pair::WordPair;
use crate::rng;

/// A relation modelled as a distribution over translations `p_t - p_s`.
///
/// Scores are `log f(p_s|src)/f(p_s) + log f(p_t|tgt)/f(p_t) +
/// sum_i [log f(d_i|matched) - log f(d_i|cross)]` with `d = p_t - p_s`.
/// The cross-pair densities share the matched locations but take their
/// spread from mismatched `(s_l, t_k)` combinations, so a relation that is
/// not translation-like contributes a factor close to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRelationModel {
    pub(crate) types: TypePredictives,
    pub(crate) diff: Vec<UnivariatePredictive>,
    pub(crate) cross: Vec<UnivariatePredictive>,
    pub(crate) seed: u64,
    pub(crate) n: usize,
}

impl TranslationRelationModel {
    pub fn fit(emb: &WordEmbedding, pairs: &[WordPair], seed: u64) -> Result<Self> {
        let (sources, targets) = pair_vectors(emb, pairs)?;
        Self::fit_vectors(&sources, &targets, seed)
    }

    /// Fits from matched source/target vectors (`sources[j]` pairs with `targets[j]`).
    pub fn fit_vectors(sources: &[&[f64]], targets: &[&[f64]], seed: u64) -> Result<Self> {
        let n = sources.len();
        if n < 2 || targets.len() != n {
            return Err(Error::InsufficientData(format!(
                "translation model needs at least 2 pairs, got {n}"
            )));
        }
        let m = sources[0].len();
        let types = TypePredictives::fit(sources, targets)?;

        let mut rng = rng::seeded(seed);
        let mut cross_idx = Vec::with_capacity(n);
        while cross_idx.len() < n {
            let l = rng.random_range(0..n);
            let k = rng.random_range(0..n);
            if l != k {
                cross_idx.push((l, k));
            }
        }

        let mut diff = Vec::with_capacity(m);
        let mut cross = Vec::with_capacity(m);
        let mut column = vec![0.0; n];
        for i in 0..m {
            for j in 0..n {
                column[j] = targets[j][i] - sources[j][i];
            }
            let matched = UnivariatePredictive::fit(&column)?;
            for (j, &(l, k)) in cross_idx.iter().enumerate() {
                column[j] = targets[k][i] - sources[l][i];
            }
            let mismatched = UnivariatePredictive::fit(&column)?.with_location(matched.location());
            diff.push(matched);
            cross.push(mismatched);
        }
        Ok(TranslationRelationModel {
            types,
            diff,
            cross,
            seed,
            n,
        })
    }

    pub fn score(&self, emb: &WordEmbedding, source: &str, target: &str) -> Result<ScoreBreakdown> {
        let v = emb.lookup_all([source, target])?;
        Ok(self.score_vectors(emb, v[0], v[1]))
    }

    pub fn score_vectors(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> ScoreBreakdown {
        let source_lbf = self.types.source_lbf(emb, ps);
        let target_lbf = self.types.target_lbf(emb, pt);
        let relation_lbf = self.relation_lbf(ps, pt);
        ScoreBreakdown::new(source_lbf, target_lbf, relation_lbf)
    }

    /// `sum_i [log f(d_i|matched) - log f(d_i|cross)]`.
    pub fn relation_lbf(&self, ps: &[f64], pt: &[f64]) -> f64 {
        self.diff
            .iter()
            .zip(&self.cross)
            .zip(ps.iter().zip(pt))
            .map(|((matched, cross), (s, t))| {
                let d = t - s;
                matched.logpdf(d) - cross.logpdf(d)
            })
            .sum()
    }

    pub fn dim(&self) -> usize {
        self.diff.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source_predictives(&self) -> &[UnivariatePredictive] {
        &self.types.source
    }

    pub fn target_predictives(&self) -> &[UnivariatePredictive] {
        &self.types.target
    }

    pub fn diff_predictives(&self) -> &[UnivariatePredictive] {
        &self.diff
    }

    pub fn cross_predictives(&self) -> &[UnivariatePredictive] {
        &self.cross
    }

    pub fn types(&self) -> &TypePredictives {
        &self.types
    }
}

pub fn fit_translation(emb: &WordEmbedding, pairs: &[WordPair], seed: u64) -> Result<TranslationRelationModel> {
    TranslationRelationModel::fit(emb, pairs, seed)
}

pub fn score_translation(
    model: &TranslationRelationModel,
    emb: &WordEmbedding,
    source: &str,
    target: &str,
) -> Result<ScoreBreakdown> {
    model.score(emb, source, target)
}
