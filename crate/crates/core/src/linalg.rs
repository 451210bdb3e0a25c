//! Dense linear algebra and zero-mean Gaussian primitives.
//!
//! Matrices are `nalgebra` dense matrices. Constructors in this crate take
//! row-major data, which is also the order used by the problem file format.

use nalgebra::{Cholesky, SymmetricEigen, SVD};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

/// Relative scale used for default tolerances.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-10;

/// Default symmetry / PSD tolerance for `sigma`: `1e-10` times its largest
/// absolute entry.
pub fn default_tolerance(sigma: &Matrix) -> f64 {
    DEFAULT_RELATIVE_TOL * sigma.amax()
}

/// Builds a matrix from row-major data.
pub fn matrix_from_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Matrix> {
    if rows * cols != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{rows}x{cols} matrix needs {} entries, got {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(Matrix::from_row_slice(rows, cols, data))
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// Lower-triangular Cholesky factor.
    Cholesky,
    /// `V * diag(sqrt(lambda))` from a symmetric eigendecomposition.
    EigenSqrt,
}

/// A square root `L` of a covariance matrix, `L * L^T = sigma`.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    factor: Matrix,
    rank: usize,
    kind: FactorKind,
}

impl CovarianceFactor {
    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.factor
    }

    /// `L * L^T`.
    pub fn reconstruct(&self) -> Matrix {
        &self.factor * self.factor.transpose()
    }

    /// Writes `L * w` into `out`, drawing `w` into `scratch`.
    ///
    /// Standard normals are drawn in coordinate order, so the output is a
    /// pure function of the generator state.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vector, out: &mut Vector) {
        for w in scratch.iter_mut() {
            *w = rng.sample(StandardNormal);
        }
        out.gemv(1.0, &self.factor, scratch, 0.0);
    }
}

/// Factors a symmetric positive semi-definite matrix.
///
/// Cholesky is tried first; if it fails, the factor is the eigen square root
/// with eigenvalues in `[-tol, 0)` clamped to zero.
pub fn factor_covariance(sigma: &Matrix, tol: f64) -> Result<CovarianceFactor> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "covariance must be square, got {}x{}",
            n,
            sigma.ncols()
        )));
    }
    if !is_finite(sigma) {
        return Err(Error::NonFinite("covariance"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (sigma[(i, j)] - sigma[(j, i)]).abs();
            if gap > tol {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    let symmetric = (sigma + sigma.transpose()) * 0.5;

    if let Some(chol) = Cholesky::new(symmetric.clone()) {
        let l = chol.l();
        if l.diagonal().iter().all(|d| *d > 0.0 && d.is_finite()) {
            return Ok(CovarianceFactor {
                factor: l,
                rank: n,
                kind: FactorKind::Cholesky,
            });
        }
    }

    let eig = SymmetricEigen::new(symmetric);
    let mut rank = 0;
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -tol {
            return Err(Error::NotPsd { eigenvalue: lambda });
        }
        let root = if lambda > tol {
            rank += 1;
            lambda.sqrt()
        } else {
            lambda.max(0.0).sqrt()
        };
        scaled.column_mut(j).scale_mut(root);
    }
    Ok(CovarianceFactor {
        factor: scaled,
        rank,
        kind: FactorKind::EigenSqrt,
    })
}

/// Draws `L * w` with `w` standard normal.
pub fn sample_mvn_zero<R: Rng + ?Sized>(factor: &CovarianceFactor, rng: &mut R) -> Vector {
    let n = factor.dim();
    let mut scratch = Vector::zeros(n);
    let mut out = Vector::zeros(n);
    factor.sample_into(rng, &mut scratch, &mut out);
    out
}

/// Number of singular values above `tol` times the largest one.
pub fn matrix_rank(m: &Matrix, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let largest = sv.max();
    if largest <= 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * largest).count()
}

/// Orthonormal basis of the null space of `m`, as columns of an
/// `ncols x (ncols - rank)` matrix.
pub fn null_space(m: &Matrix, tol: f64) -> Matrix {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Matrix::identity(n, n);
    }
    // Pad to at least n rows so the thin SVD returns a full V.
    let mut padded = Matrix::zeros(m.nrows().max(n), n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let largest = svd.singular_values.max();
    let cols: Vec<usize> = (0..n)
        .filter(|&j| largest <= 0.0 || svd.singular_values[j] <= tol * largest)
        .collect();
    let mut basis = Matrix::zeros(n, cols.len());
    for (out, &j) in cols.iter().enumerate() {
        basis.set_column(out, &v_t.row(j).transpose());
    }
    basis
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.amax()
    }
}
