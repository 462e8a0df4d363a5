use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::models::pair_vectors;
use crate::pair::WordPair;

/// `cos(p_t, p_s + mean_i (p_{t_i} - p_{s_i}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeCosAvgModel {
    pub(crate) avg_translation: Vec<f64>,
    pub(crate) n: usize,
}

/// Cosine similarity, or `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

impl ThreeCosAvgModel {
    pub fn fit(emb: &WordEmbedding, pairs: &[WordPair]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientData("3CosAvg needs at least one training pair".into()));
        }
        let (sources, targets) = pair_vectors(emb, pairs)?;
        Ok(Self::fit_vectors(&sources, &targets))
    }

    pub fn fit_vectors(sources: &[&[f64]], targets: &[&[f64]]) -> Self {
        let m = sources[0].len();
        let n = sources.len();
        let mut avg = vec![0.0; m];
        for (s, t) in sources.iter().zip(targets) {
            for i in 0..m {
                avg[i] += t[i] - s[i];
            }
        }
        for a in &mut avg {
            *a /= n as f64;
        }
        ThreeCosAvgModel { avg_translation: avg, n }
    }

    pub fn from_translation(avg_translation: Vec<f64>) -> Self {
        ThreeCosAvgModel { avg_translation, n: 0 }
    }

    pub fn avg_translation(&self) -> &[f64] {
        &self.avg_translation
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn score(&self, emb: &WordEmbedding, source: &str, target: &str) -> Result<f64> {
        let v = emb.lookup_all([source, target])?;
        self.score_vectors(v[0], v[1])
    }

    pub fn score_vectors(&self, ps: &[f64], pt: &[f64]) -> Result<f64> {
        let shifted: Vec<f64> = ps.iter().zip(&self.avg_translation).map(|(s, r)| s + r).collect();
        cosine(pt, &shifted).ok_or_else(|| Error::Numerical("3CosAvg operand has zero norm".into()))
    }
}

pub fn score_3cosavg(model: &ThreeCosAvgModel, emb: &WordEmbedding, source: &str, target: &str) -> Result<f64> {
    model.score(emb, source, target)
}
