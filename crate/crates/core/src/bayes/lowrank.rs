use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Top-`k` right singular vectors of the training source matrix together
/// with the regression design `X` they induce.
///
/// Row `j` of `X` is `(p_{s_j} . v_1, ..., p_{s_j} . v_k, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankBasis {
    k: usize,
    /// `k x m`, row `j` is `v_{j+1}`.
    basis: DMatrix<f64>,
    /// `n x (k + 1)`.
    design: DMatrix<f64>,
    singular_values: Vec<f64>,
}

impl LowRankBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> DVector<f64> {
        self.basis.row(j).transpose()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// All singular values of the source matrix, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `(p . v_1, ..., p . v_k, 1)`.
    pub fn project(&self, p: &[f64]) -> DVector<f64> {
        assert_eq!(p.len(), self.dim(), "vector dimension mismatch");
        let mut out = DVector::zeros(self.k + 1);
        for j in 0..self.k {
            out[j] = self.basis.row(j).iter().zip(p).map(|(a, b)| a * b).sum();
        }
        out[self.k] = 1.0;
        out
    }

    /// Rebuilds a basis from stored parts (model loading).
    pub(crate) fn from_parts(basis: DMatrix<f64>, design: DMatrix<f64>, singular_values: Vec<f64>) -> Result<Self> {
        let k = basis.nrows();
        if k == 0 || design.ncols() != k + 1 || design.nrows() < k + 2 {
            return Err(Error::Model(format!(
                "inconsistent low-rank basis: {} basis vectors, design {}x{}",
                k,
                design.nrows(),
                design.ncols()
            )));
        }
        Ok(LowRankBasis {
            k,
            basis,
            design,
            singular_values,
        })
    }
}

/// SVD of the `n x m` source matrix, keeping the top `k` right singular
/// vectors. Each kept vector is oriented so its largest-magnitude coordinate
/// is positive.
pub fn fit_low_rank_basis(sources: &DMatrix<f64>, k: usize) -> Result<LowRankBasis> {
    let (n, m) = sources.shape();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "low-rank basis needs at least 3 source vectors, got {n}"
        )));
    }
    let k_max = (n - 2).min(m);
    if k == 0 || k > k_max {
        return Err(Error::InvalidArgument(format!(
            "rank k = {k} out of range 1..={k_max} for {n} sources in {m} dimensions"
        )));
    }
    let svd = sources.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let tol = singular_values[0] * (n.max(m) as f64) * f64::EPSILON;
    let rank = singular_values.iter().filter(|&&s| s > tol).count();
    if rank < k {
        log::warn!("source matrix has rank {rank} < k = {k}; trailing directions carry no signal");
    }

    let mut basis = DMatrix::zeros(k, m);
    let mut design = DMatrix::from_element(n, k + 1, 1.0);
    for (j, &idx) in order.iter().take(k).enumerate() {
        let v = v_t.row(idx);
        let mut pivot = 0;
        for c in 1..m {
            if v[c].abs() > v[pivot].abs() {
                pivot = c;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        basis.row_mut(j).copy_from(&(v * sign));
        // first k columns of U * Sigma
        let scale = sign * svd.singular_values[idx];
        for r in 0..n {
            design[(r, j)] = u[(r, idx)] * scale;
        }
    }
    Ok(LowRankBasis {
        k,
        basis,
        design,
        singular_values,
    })
}

pub fn project(basis: &LowRankBasis, p: &[f64]) -> DVector<f64> {
    basis.project(p)
}
