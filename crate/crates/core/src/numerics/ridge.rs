use alloc::format;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tikhonov-regularized least squares `argmin_w ||X w - z||^2 + beta ||w||^2`.
///
/// Rows of `features` are samples. No intercept column is added.
#[derive(Debug, Clone, Copy)]
pub struct RidgeProblem<'a> {
    pub features: &'a DMatrix<f64>,
    pub targets: &'a DMatrix<f64>,
    pub regularization: f64,
}

impl<'a> RidgeProblem<'a> {
    pub fn new(features: &'a DMatrix<f64>, targets: &'a DMatrix<f64>, regularization: f64) -> Self {
        Self { features, targets, regularization }
    }

    fn validate(&self) -> Result<()> {
        let (n, _) = self.features.shape();
        if n == 0 || self.features.ncols() == 0 {
            return Err(Error::InsufficientData { needed: 1, got: n });
        }
        if self.targets.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.targets.nrows() });
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::InvalidInput(format!("regularization must be >= 0, got {}", self.regularization)));
        }
        if self.features.iter().chain(self.targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("ridge inputs contain non-finite values".into()));
        }
        Ok(())
    }

    /// Weights of shape `n_features x n_outputs`.
    pub fn solve(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let gram = self.features.transpose() * self.features;
        let cross = self.features.transpose() * self.targets;
        solve_normal_equations(gram, &cross, self.regularization)
    }
}

pub fn ridge_solve(features: &DMatrix<f64>, targets: &DMatrix<f64>, regularization: f64) -> Result<DMatrix<f64>> {
    RidgeProblem::new(features, targets, regularization).solve()
}

/// Solves `(G + beta I) w = c` for symmetric positive semi-definite `G`.
///
/// Cholesky first, with a couple of refinement sweeps; if the factorization
/// fails or is numerically singular, a symmetric eigen-solve takes over. At
/// `beta = 0` a rank-deficient `G` is an error.
pub fn solve_normal_equations(mut gram: DMatrix<f64>, cross: &DMatrix<f64>, regularization: f64) -> Result<DMatrix<f64>> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: gram.ncols() });
    }
    if cross.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: cross.nrows() });
    }
    for i in 0..n {
        gram[(i, i)] += regularization;
    }

    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = l[(i, i)] * l[(i, i)];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        // Reject factorizations whose pivots signal numerical singularity.
        if lo > hi * f64::EPSILON * n as f64 {
            let mut w = chol.solve(cross);
            for _ in 0..2 {
                let r = cross - &gram * &w;
                w += chol.solve(&r);
            }
            return Ok(w);
        }
    }

    let eig = gram.symmetric_eigen();
    let largest = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = largest * f64::EPSILON * n as f64;
    let rank = eig.eigenvalues.iter().filter(|v| **v > cutoff).count();
    if rank < n && regularization == 0.0 {
        return Err(Error::RankDeficient { rank, size: n });
    }
    let mut projected = eig.eigenvectors.transpose() * cross;
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        let inv = if *lambda > cutoff { 1.0 / lambda } else { 0.0 };
        projected.row_mut(i).scale_mut(inv);
    }
    Ok(&eig.eigenvectors * projected)
}
