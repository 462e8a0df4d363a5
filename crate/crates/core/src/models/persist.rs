//! Versioned JSON container for fitted models.
//!
//! Every number is written with 17 significant digits, so a reloaded model
//! reproduces the saved parameters exactly.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FittedModel, ModelKind, RegressionRelationModel, TranslationRelationModel, TypePredictives};
use crate::baselines::{ClassWeights, LrCosModel, MarginClassifier, ThreeCosAvgModel};
use crate::bayes::{BayesRegressionPredictive, LowRankBasis, RegressionDesign, UnivariatePredictive};
use crate::error::{Error, Result};
use crate::jsonfmt::{self, FloatStyle};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Struct-of-arrays form of `m` Student-t predictives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveArrays {
    pub df: Vec<f64>,
    pub location: Vec<f64>,
    pub scale2: Vec<f64>,
}

impl PredictiveArrays {
    fn from_slice(preds: &[UnivariatePredictive]) -> Self {
        PredictiveArrays {
            df: preds.iter().map(|p| p.df()).collect(),
            location: preds.iter().map(|p| p.location()).collect(),
            scale2: preds.iter().map(|p| p.scale2()).collect(),
        }
    }

    fn to_vec(&self, m: usize, what: &str) -> Result<Vec<UnivariatePredictive>> {
        if self.df.len() != m || self.location.len() != m || self.scale2.len() != m {
            return Err(Error::Model(format!("{what}: expected {m} coordinates")));
        }
        (0..m)
            .map(|i| {
                UnivariatePredictive::new(self.df[i], self.location[i], self.scale2[i])
                    .map_err(|e| Error::Model(format!("{what}[{i}]: {e}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub k: usize,
    /// Rows are the basis vectors `v_1..v_k`.
    pub vectors: Vec<Vec<f64>>,
    /// Rows of the `n x (k+1)` design matrix.
    pub design: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionArrays {
    pub df: Vec<f64>,
    pub sigma0_2: Vec<f64>,
    /// One `(k+1)`-vector per target coordinate.
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginDocument {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub positive_weight: f64,
    pub negative_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub model_kind: ModelKind,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_pred: Option<PredictiveArrays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_pred: Option<PredictiveArrays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff_pred: Option<PredictiveArrays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_pred: Option<PredictiveArrays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_inverse: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_jitter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionArrays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_translation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<MarginDocument>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Model(format!("{what}: every row must have {ncols} entries")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

fn required<T>(field: Option<T>, name: &str, kind: ModelKind) -> Result<T> {
    field.ok_or_else(|| Error::Model(format!("{kind} model is missing `{name}`")))
}

impl ModelDocument {
    fn empty(kind: ModelKind, m: usize, n: usize) -> Self {
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            model_kind: kind,
            m,
            n,
            seed: None,
            source_pred: None,
            target_pred: None,
            diff_pred: None,
            cross_pred: None,
            basis: None,
            gram_inverse: None,
            gram_jitter: None,
            regression: None,
            avg_translation: None,
            margin: None,
        }
    }

    pub fn from_model(model: &FittedModel) -> Self {
        match model {
            FittedModel::Translation(t) => {
                let mut doc = Self::empty(ModelKind::Translation, t.dim(), t.n());
                doc.seed = Some(t.seed);
                doc.source_pred = Some(PredictiveArrays::from_slice(&t.types.source));
                doc.target_pred = Some(PredictiveArrays::from_slice(&t.types.target));
                doc.diff_pred = Some(PredictiveArrays::from_slice(&t.diff));
                doc.cross_pred = Some(PredictiveArrays::from_slice(&t.cross));
                doc
            }
            FittedModel::Regression(r) => {
                let mut doc = Self::empty(ModelKind::Regression, r.dim(), r.n());
                doc.source_pred = Some(PredictiveArrays::from_slice(&r.source));
                doc.basis = Some(BasisDocument {
                    k: r.basis.k(),
                    vectors: rows(r.basis.basis()),
                    design: rows(r.basis.design()),
                    singular_values: r.basis.singular_values().to_vec(),
                });
                doc.gram_inverse = Some(rows(r.design.gram_inverse()));
                doc.gram_jitter = Some(r.design.jitter());
                doc.regression = Some(RegressionArrays {
                    df: r.per_coordinate.iter().map(|c| c.df()).collect(),
                    sigma0_2: r.per_coordinate.iter().map(|c| c.sigma0_2()).collect(),
                    coefficients: r
                        .per_coordinate
                        .iter()
                        .map(|c| c.coefficients().iter().copied().collect())
                        .collect(),
                });
                doc
            }
            FittedModel::ThreeCosAvg(c) => {
                let mut doc = Self::empty(ModelKind::ThreeCosAvg, c.avg_translation.len(), c.n);
                doc.avg_translation = Some(c.avg_translation.clone());
                doc
            }
            FittedModel::LrCos(l) => {
                let mut doc = Self::empty(ModelKind::LrCos, l.types.source.len(), l.n);
                doc.source_pred = Some(PredictiveArrays::from_slice(&l.types.source));
                doc.target_pred = Some(PredictiveArrays::from_slice(&l.types.target));
                doc
            }
            FittedModel::Margin(c) => {
                let mut doc = Self::empty(ModelKind::Margin, c.weights.len(), 0);
                doc.margin = Some(MarginDocument {
                    weights: c.weights.clone(),
                    bias: c.bias,
                    c: c.c,
                    positive_weight: c.class_weights.positive,
                    negative_weight: c.class_weights.negative,
                });
                doc
            }
        }
    }

    pub fn into_model(self) -> Result<FittedModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let kind = self.model_kind;
        let m = self.m;
        if m == 0 {
            return Err(Error::Model("m must be positive".into()));
        }
        Ok(match kind {
            ModelKind::Translation => FittedModel::Translation(TranslationRelationModel {
                types: TypePredictives {
                    source: required(self.source_pred, "source_pred", kind)?.to_vec(m, "source_pred")?,
                    target: required(self.target_pred, "target_pred", kind)?.to_vec(m, "target_pred")?,
                },
                diff: required(self.diff_pred, "diff_pred", kind)?.to_vec(m, "diff_pred")?,
                cross: required(self.cross_pred, "cross_pred", kind)?.to_vec(m, "cross_pred")?,
                seed: required(self.seed, "seed", kind)?,
                n: self.n,
            }),
            ModelKind::Regression => {
                let source = required(self.source_pred, "source_pred", kind)?.to_vec(m, "source_pred")?;
                let b = required(self.basis, "basis", kind)?;
                let k = b.k;
                let basis = LowRankBasis::from_parts(
                    matrix(&b.vectors, m, "basis.vectors")?,
                    matrix(&b.design, k + 1, "basis.design")?,
                    b.singular_values,
                )?;
                if basis.k() != k {
                    return Err(Error::Model("basis.k does not match the stored vectors".into()));
                }
                let gram_inverse = matrix(&required(self.gram_inverse, "gram_inverse", kind)?, k + 1, "gram_inverse")?;
                let design = RegressionDesign::from_parts(
                    basis.design().clone(),
                    gram_inverse,
                    self.gram_jitter.unwrap_or(0.0),
                )?;
                let reg = required(self.regression, "regression", kind)?;
                if reg.df.len() != m || reg.sigma0_2.len() != m || reg.coefficients.len() != m {
                    return Err(Error::Model(format!("regression: expected {m} coordinates")));
                }
                let shared = Arc::new(design.gram_inverse().clone());
                let per_coordinate = (0..m)
                    .map(|i| {
                        if reg.coefficients[i].len() != k + 1 {
                            return Err(Error::Model(format!("regression.coefficients[{i}] must have {} entries", k + 1)));
                        }
                        BayesRegressionPredictive::from_parts(
                            DVector::from_column_slice(&reg.coefficients[i]),
                            Arc::clone(&shared),
                            reg.df[i],
                            reg.sigma0_2[i],
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                FittedModel::Regression(RegressionRelationModel {
                    source,
                    basis,
                    design,
                    per_coordinate,
                })
            }
            ModelKind::ThreeCosAvg => {
                let avg = required(self.avg_translation, "avg_translation", kind)?;
                if avg.len() != m || avg.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Model(format!("avg_translation must hold {m} finite values")));
                }
                FittedModel::ThreeCosAvg(ThreeCosAvgModel {
                    avg_translation: avg,
                    n: self.n,
                })
            }
            ModelKind::LrCos => FittedModel::LrCos(LrCosModel {
                types: TypePredictives {
                    source: required(self.source_pred, "source_pred", kind)?.to_vec(m, "source_pred")?,
                    target: required(self.target_pred, "target_pred", kind)?.to_vec(m, "target_pred")?,
                },
                n: self.n,
            }),
            ModelKind::Margin => {
                let d = required(self.margin, "margin", kind)?;
                if d.weights.len() != m {
                    return Err(Error::Model(format!("margin.weights must hold {m} values")));
                }
                FittedModel::Margin(MarginClassifier::from_parts(
                    d.weights,
                    d.bias,
                    d.c,
                    ClassWeights {
                        positive: d.positive_weight,
                        negative: d.negative_weight,
                    },
                ))
            }
        })
    }
}

pub fn save_model<W: Write>(model: &FittedModel, writer: W) -> Result<()> {
    let doc = ModelDocument::from_model(model);
    jsonfmt::to_writer(writer, &doc, FloatStyle::Exact)?;
    Ok(())
}

pub fn load_model<R: Read>(reader: R) -> Result<FittedModel> {
    let doc: ModelDocument = serde_json::from_reader(reader)?;
    doc.into_model()
}
