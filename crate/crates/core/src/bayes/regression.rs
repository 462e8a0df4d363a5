use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::lowrank::LowRankBasis;
use super::univariate::{variance_floor, UnivariatePredictive};
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e12;

/// The parts of a Bayesian linear regression shared by every target
/// coordinate: the design `X` and `(X'X)^-1`.
#[derive(Debug, Clone)]
pub struct RegressionDesign {
    design: Arc<DMatrix<f64>>,
    gram_inverse: Arc<DMatrix<f64>>,
    jitter: f64,
}

impl RegressionDesign {
    /// Inverts `X'X`, adding a ridge of `1e-10 * trace / (k + 1)` first when
    /// its condition number exceeds `1e12`.
    pub fn new(design: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = design.shape();
        if n <= p {
            return Err(Error::InsufficientData(format!(
                "regression needs more than {p} observations, got {n}"
            )));
        }
        let mut gram = design.transpose() * design;
        let eig = SymmetricEigen::new(gram.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let jitter = if min <= 0.0 || max / min > MAX_CONDITION {
            let j = 1e-10 * gram.trace() / p as f64;
            log::debug!("X'X condition {:.3e}; adding ridge {j:.3e}", max / min);
            for i in 0..p {
                gram[(i, i)] += j;
            }
            j
        } else {
            0.0
        };
        let chol = Cholesky::new(gram).ok_or_else(|| Error::Numerical("X'X is not invertible".into()))?;
        let mut inv = chol.inverse();
        for i in 0..p {
            for j in 0..i {
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        Ok(RegressionDesign {
            design: Arc::new(design.clone()),
            gram_inverse: Arc::new(inv),
            jitter,
        })
    }

    pub fn from_basis(basis: &LowRankBasis) -> Result<Self> {
        Self::new(basis.design())
    }

    pub(crate) fn from_parts(design: DMatrix<f64>, gram_inverse: DMatrix<f64>, jitter: f64) -> Result<Self> {
        let p = design.ncols();
        if gram_inverse.shape() != (p, p) {
            return Err(Error::Model("gram_inverse shape does not match the design".into()));
        }
        Ok(RegressionDesign {
            design: Arc::new(design),
            gram_inverse: Arc::new(gram_inverse),
            jitter,
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn gram_inverse(&self) -> &DMatrix<f64> {
        &self.gram_inverse
    }

    /// Ridge added to `X'X` before inversion (0 when well conditioned).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Least-squares fit of one target coordinate, `nu0 = n - k - 1` and
    /// `s0^2 = RSS / nu0` floored at `1e-9 (1 + mean(b)^2)`.
    pub fn fit(&self, targets: &[f64]) -> Result<BayesRegressionPredictive> {
        let (n, p) = self.design.shape();
        if targets.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} targets for a design with {n} rows",
                targets.len()
            )));
        }
        if let Some(x) = targets.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite target {x}")));
        }
        let b = DVector::from_column_slice(targets);
        let coefficients = &*self.gram_inverse * (self.design.transpose() * &b);
        let residual = &b - &*self.design * &coefficients;
        let df = (n - p) as f64;
        let mean = b.mean();
        let sigma0_2 = (residual.norm_squared() / df).max(variance_floor(mean));
        Ok(BayesRegressionPredictive {
            coefficients,
            gram_inverse: Arc::clone(&self.gram_inverse),
            df,
            sigma0_2,
        })
    }
}

/// Posterior predictive of a target coordinate given a projected source.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesRegressionPredictive {
    coefficients: DVector<f64>,
    gram_inverse: Arc<DMatrix<f64>>,
    df: f64,
    sigma0_2: f64,
}

impl BayesRegressionPredictive {
    pub(crate) fn from_parts(
        coefficients: DVector<f64>,
        gram_inverse: Arc<DMatrix<f64>>,
        df: f64,
        sigma0_2: f64,
    ) -> Result<Self> {
        if coefficients.len() != gram_inverse.nrows() || df.is_nan() || df <= 0.0 || sigma0_2.is_nan() || sigma0_2 <= 0.0 {
            return Err(Error::Model("inconsistent regression predictive".into()));
        }
        Ok(BayesRegressionPredictive {
            coefficients,
            gram_inverse,
            df,
            sigma0_2,
        })
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn gram_inverse(&self) -> &DMatrix<f64> {
        &self.gram_inverse
    }

    #[cfg(test)]
    pub(crate) fn shared_gram_inverse(&self) -> &Arc<DMatrix<f64>> {
        &self.gram_inverse
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn sigma0_2(&self) -> f64 {
        self.sigma0_2
    }

    /// Leverage term `p*' (X'X)^-1 p*`, clamped at zero.
    pub fn leverage(&self, p_star: &DVector<f64>) -> f64 {
        p_star.dot(&(&*self.gram_inverse * p_star)).max(0.0)
    }

    /// The Student-t the target coordinate follows at `p_star`.
    pub fn predictive_at(&self, p_star: &DVector<f64>) -> UnivariatePredictive {
        assert_eq!(p_star.len(), self.coefficients.len(), "projected vector length mismatch");
        let location = p_star.dot(&self.coefficients);
        let scale2 = self.sigma0_2 * (1.0 + self.leverage(p_star));
        UnivariatePredictive::new(self.df, location, scale2).expect("regression predictive parameters are valid")
    }

    pub fn logpdf(&self, p_star: &DVector<f64>, x: f64) -> f64 {
        self.predictive_at(p_star).logpdf(x)
    }
}

pub fn fit_bayes_regression(basis: &LowRankBasis, targets: &[f64]) -> Result<BayesRegressionPredictive> {
    let n = basis.n();
    let k = basis.k();
    if n < k + 2 {
        return Err(Error::InsufficientData(format!(
            "regression with k = {k} needs at least {} pairs, got {n}",
            k + 2
        )));
    }
    RegressionDesign::from_basis(basis)?.fit(targets)
}

pub fn regression_predictive_logpdf(model: &BayesRegressionPredictive, p_star: &DVector<f64>, x: f64) -> f64 {
    model.logpdf(p_star, x)
}
