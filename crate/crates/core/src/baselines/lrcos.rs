use super::cosavg::cosine;
use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::models::{pair_vectors, TypePredictives};
use crate::pair::WordPair;

/// `f(p_s|src)/f(p_s) * f(p_t|tgt)/f(p_t) * cos(p_s, p_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrCosModel {
    pub(crate) types: TypePredictives,
    pub(crate) n: usize,
}

/// The three factors of an LRCos score, with the Bayes factors in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrCosComponents {
    pub source_lbf: f64,
    pub target_lbf: f64,
    pub cosine: f64,
}

impl LrCosComponents {
    /// The literal product; may overflow to infinity or underflow to zero
    /// for large embeddings.
    pub fn product(&self) -> f64 {
        if self.cosine == 0.0 {
            return 0.0;
        }
        self.cosine.signum() * (self.source_lbf + self.target_lbf + self.cosine.abs().ln()).exp()
    }

    /// Strictly increasing transform of [`product`](Self::product),
    /// `sign * asinh(|product|)`, evaluated without leaving log space.
    pub fn ranking_score(&self) -> f64 {
        if self.cosine == 0.0 {
            return 0.0;
        }
        let log_mag = self.source_lbf + self.target_lbf + self.cosine.abs().ln();
        let mag = if log_mag > 20.0 {
            log_mag + (1.0 + (1.0 + (-2.0 * log_mag).exp()).sqrt()).ln()
        } else {
            log_mag.exp().asinh()
        };
        self.cosine.signum() * mag
    }
}

impl LrCosModel {
    pub fn fit(emb: &WordEmbedding, pairs: &[WordPair]) -> Result<Self> {
        let (sources, targets) = pair_vectors(emb, pairs)?;
        Self::fit_vectors(&sources, &targets)
    }

    pub fn fit_vectors(sources: &[&[f64]], targets: &[&[f64]]) -> Result<Self> {
        if sources.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "LRCos needs at least 2 pairs, got {}",
                sources.len()
            )));
        }
        Ok(LrCosModel {
            types: TypePredictives::fit(sources, targets)?,
            n: sources.len(),
        })
    }

    pub fn from_types(types: TypePredictives) -> Self {
        LrCosModel { types, n: 0 }
    }

    pub fn types(&self) -> &TypePredictives {
        &self.types
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> Result<LrCosComponents> {
        let cosine = cosine(ps, pt).ok_or_else(|| Error::Numerical("LRCos operand has zero norm".into()))?;
        Ok(LrCosComponents {
            source_lbf: self.types.source_lbf(emb, ps),
            target_lbf: self.types.target_lbf(emb, pt),
            cosine,
        })
    }

    pub fn score(&self, emb: &WordEmbedding, source: &str, target: &str) -> Result<f64> {
        let v = emb.lookup_all([source, target])?;
        self.score_vectors(emb, v[0], v[1])
    }

    pub fn score_vectors(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> Result<f64> {
        Ok(self.components(emb, ps, pt)?.product())
    }

    pub fn ranking_score(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> Result<f64> {
        Ok(self.components(emb, ps, pt)?.ranking_score())
    }
}

pub fn score_lrcos(model: &LrCosModel, emb: &WordEmbedding, source: &str, target: &str) -> Result<f64> {
    model.score(emb, source, target)
}
