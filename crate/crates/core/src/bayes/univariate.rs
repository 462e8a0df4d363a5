use serde::{Deserialize, Serialize};

use super::student_t::student_t_logpdf;
use crate::error::{Error, Result};

/// Smallest squared scale allowed at a given location.
pub fn variance_floor(location: f64) -> f64 {
    1e-9 * (1.0 + location * location)
}

/// Posterior predictive of one Gaussian coordinate with unknown mean and
/// variance under flat priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePredictive {
    df: f64,
    location: f64,
    scale2: f64,
}

impl UnivariatePredictive {
    pub fn new(df: f64, location: f64, scale2: f64) -> Result<Self> {
        if !(df > 0.0 && df.is_finite()) || !location.is_finite() || !(scale2 > 0.0 && scale2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "invalid Student-t parameters (df {df}, location {location}, scale2 {scale2})"
            )));
        }
        Ok(UnivariatePredictive { df, location, scale2 })
    }

    /// Fits `t_{n-1}(mean, (n+1) SS / (n (n-1)))` to the samples.
    pub fn fit(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "a predictive needs at least 2 samples, got {n}"
            )));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample {x}")));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let scale2 = ((nf + 1.0) * ss / (nf * (nf - 1.0))).max(variance_floor(mean));
        Ok(UnivariatePredictive {
            df: nf - 1.0,
            location: mean,
            scale2,
        })
    }

    /// Same spread, moved to `location`; the floor is re-applied there.
    pub fn with_location(self, location: f64) -> Self {
        UnivariatePredictive {
            df: self.df,
            location,
            scale2: self.scale2.max(variance_floor(location)),
        }
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale2(&self) -> f64 {
        self.scale2
    }

    pub fn logpdf(&self, x: f64) -> f64 {
        student_t_logpdf(x, self.df, self.location, self.scale2)
    }
}

pub fn fit_univariate_predictive(samples: &[f64]) -> Result<UnivariatePredictive> {
    UnivariatePredictive::fit(samples)
}

pub fn predictive_logpdf(p: &UnivariatePredictive, x: f64) -> f64 {
    p.logpdf(x)
}
