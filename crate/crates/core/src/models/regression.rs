use nalgebra::{DMatrix, DVector};

use super::{fit_columns, pair_vectors, type_log_bayes_factor, ScoreBreakdown};
use crate::bayes::{fit_low_rank_basis, student_t_logpdf, BayesRegressionPredictive, LowRankBasis, RegressionDesign, UnivariatePredictive};
use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::pair::WordPair;

/// Default rank of the source subspace: `max(1, floor((n - 1) / 2))`,
/// capped at `min(n - 2, m)`.
pub fn default_rank(n: usize, m: usize) -> usize {
    ((n.saturating_sub(1)) / 2).max(1).min(n.saturating_sub(2)).min(m).max(1)
}

/// A relation modelled as a Bayesian linear map from the low-rank source
/// subspace to each target coordinate.
///
/// Scores are `log f(p_s|src)/f(p_s) + log f(p_t|p_s)/f(p_t)`; the target
/// type factor cancels, so `target_type_lbf` is always 0.
#[derive(Debug, Clone)]
pub struct RegressionRelationModel {
    pub(crate) source: Vec<UnivariatePredictive>,
    pub(crate) basis: LowRankBasis,
    pub(crate) design: RegressionDesign,
    pub(crate) per_coordinate: Vec<BayesRegressionPredictive>,
}

impl PartialEq for RegressionRelationModel {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.basis == other.basis
            && self.design.gram_inverse() == other.design.gram_inverse()
            && self.per_coordinate == other.per_coordinate
    }
}

impl RegressionRelationModel {
    pub fn fit(emb: &WordEmbedding, pairs: &[WordPair], k_override: Option<usize>) -> Result<Self> {
        let (sources, targets) = pair_vectors(emb, pairs)?;
        Self::fit_vectors(&sources, &targets, k_override)
    }

    pub fn fit_vectors(sources: &[&[f64]], targets: &[&[f64]], k_override: Option<usize>) -> Result<Self> {
        let n = sources.len();
        if n < 4 || targets.len() != n {
            return Err(Error::InsufficientData(format!(
                "regression model needs at least 4 pairs, got {n}"
            )));
        }
        let m = sources[0].len();
        let k = match k_override {
            Some(k) => k,
            None => default_rank(n, m),
        };
        let source_matrix = DMatrix::from_fn(n, m, |r, c| sources[r][c]);
        let basis = fit_low_rank_basis(&source_matrix, k)?;
        let design = RegressionDesign::from_basis(&basis)?;
        let mut column = vec![0.0; n];
        let per_coordinate = (0..m)
            .map(|i| {
                for (c, t) in column.iter_mut().zip(targets) {
                    *c = t[i];
                }
                design.fit(&column)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RegressionRelationModel {
            source: fit_columns(sources)?,
            basis,
            design,
            per_coordinate,
        })
    }

    pub fn score(&self, emb: &WordEmbedding, source: &str, target: &str) -> Result<ScoreBreakdown> {
        let v = emb.lookup_all([source, target])?;
        Ok(self.score_vectors(emb, v[0], v[1]))
    }

    pub fn score_vectors(&self, emb: &WordEmbedding, ps: &[f64], pt: &[f64]) -> ScoreBreakdown {
        let source_lbf = type_log_bayes_factor(&self.source, emb, ps);
        let relation_lbf = self.conditional_logpdf(ps, pt) - emb.background_logpdf(pt);
        ScoreBreakdown::new(source_lbf, 0.0, relation_lbf)
    }

    /// `sum_i log f(x_i^t | p_s)`.
    pub fn conditional_logpdf(&self, ps: &[f64], pt: &[f64]) -> f64 {
        let p_star = self.basis.project(ps);
        // every coordinate shares (X'X)^-1, so the leverage is computed once
        let leverage = self.per_coordinate[0].leverage(&p_star);
        self.per_coordinate
            .iter()
            .zip(pt)
            .map(|(model, x)| {
                let location = p_star.dot(model.coefficients());
                let scale2 = model.sigma0_2() * (1.0 + leverage);
                student_t_logpdf(*x, model.df(), location, scale2)
            })
            .sum()
    }

    /// Per-coordinate predictive of the target given a source vector.
    pub fn predictive(&self, ps: &[f64]) -> Vec<UnivariatePredictive> {
        let p_star = self.basis.project(ps);
        self.per_coordinate.iter().map(|m| m.predictive_at(&p_star)).collect()
    }

    pub fn project(&self, ps: &[f64]) -> DVector<f64> {
        self.basis.project(ps)
    }

    pub fn k(&self) -> usize {
        self.basis.k()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.per_coordinate.len()
    }

    pub fn basis(&self) -> &LowRankBasis {
        &self.basis
    }

    pub fn source_predictives(&self) -> &[UnivariatePredictive] {
        &self.source
    }

    pub fn coordinate_models(&self) -> &[BayesRegressionPredictive] {
        &self.per_coordinate
    }

    pub fn design(&self) -> &RegressionDesign {
        &self.design
    }
}

pub fn fit_regression(emb: &WordEmbedding, pairs: &[WordPair], k_override: Option<usize>) -> Result<RegressionRelationModel> {
    RegressionRelationModel::fit(emb, pairs, k_override)
}

pub fn score_regression(
    model: &RegressionRelationModel,
    emb: &WordEmbedding,
    source: &str,
    target: &str,
) -> Result<ScoreBreakdown> {
    model.score(emb, source, target)
}
