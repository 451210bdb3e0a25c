//! Latent-variable reformulation.
//!
//! With `E = S C^T (C S C^T)^-1`, `F = I - E C`, `g = F mu - E d`,
//! `H = A F` and `k = A g + b`, every `x = F y + g` satisfies `C x + d = 0`,
//! and `y ~ N(0, S)` restricted to `H y + k >= 0` maps onto the original
//! constrained distribution. Without equalities this reduces to `F = I`,
//! `g = mu`, `H = A`, `k = A mu + b`.

use nalgebra::{Cholesky, SVD};

use crate::error::{Error, Result};
use crate::linalg::{matrix_rank, Matrix, Vector};
use crate::problem::ProblemSpec;

/// Relative singular-value cutoff used for rank decisions on `C` and `[C | d]`.
pub const EQUALITY_RANK_TOL: f64 = 1e-10;

/// Rows of `H = A F` whose norm falls below this fraction of the matching
/// row of `A` are set to exactly zero: they are constant constraints `k_i >= 0`.
const NEGLIGIBLE_ROW: f64 = 1e-10;

/// `g` must satisfy every original equality row to within this absolute
/// tolerance, scaled by `1 + max |d_i|`.
pub const EQUALITY_RESIDUAL_TOL: f64 = 1e-8;

/// How many solutions `C x + d = 0` admits.
#[derive(Debug, Clone, PartialEq)]
pub enum EqualityClass {
    NoSolution,
    Unique(Vector),
    Infinite,
}

#[derive(Debug, Clone)]
pub struct TransformedProblem {
    /// `S C^T (C S C^T)^-1` over the independent equality rows; `None` when
    /// there are no equalities.
    pub e: Option<Matrix>,
    pub f: Matrix,
    pub g: Vector,
    pub h: Matrix,
    pub k: Vector,
}

impl TransformedProblem {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn num_inequalities(&self) -> usize {
        self.h.nrows()
    }

    /// `x = F y + g`.
    pub fn map_latent(&self, y: &Vector) -> Vector {
        let mut x = self.g.clone();
        x.gemv(1.0, &self.f, y, 1.0);
        x
    }

    /// `H y + k`.
    pub fn latent_slack(&self, y: &Vector) -> Vector {
        let mut s = self.k.clone();
        s.gemv(1.0, &self.h, y, 1.0);
        s
    }

    /// Smallest entry of `H y + k` (`+inf` when `m = 0`).
    pub fn min_latent_slack(&self, y: &Vector) -> f64 {
        self.latent_slack(y).iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Classifies `C x + d = 0` by comparing `rank(C)` with `rank([C | -d])`.
pub fn classify_equality_system(c: &Matrix, d: &Vector, tol: f64) -> EqualityClass {
    let n = c.ncols();
    if c.nrows() == 0 {
        return if n == 0 {
            EqualityClass::Unique(Vector::zeros(0))
        } else {
            EqualityClass::Infinite
        };
    }
    let rank_c = matrix_rank(c, tol);
    let augmented = augment(c, &(-d));
    let rank_aug = matrix_rank(&augmented, tol);
    if rank_c < rank_aug {
        return EqualityClass::NoSolution;
    }
    if rank_c == n {
        let svd = SVD::new(c.clone(), true, true);
        let x = svd
            .solve(&(-d), tol * svd.singular_values.max())
            .expect("u and v_t were requested");
        return EqualityClass::Unique(x);
    }
    EqualityClass::Infinite
}

/// Indices of the rows of `[C | d]` that are not linear combinations of
/// earlier rows.
pub fn independent_rows(c: &Matrix, d: &Vector, tol: f64) -> Vec<usize> {
    let augmented = augment(c, d);
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..augmented.nrows() {
        let mut rows = kept.clone();
        rows.push(i);
        if matrix_rank(&augmented.select_rows(rows.iter()), tol) == rows.len() {
            kept.push(i);
        }
    }
    kept
}

pub fn build_transform(spec: &ProblemSpec) -> Result<TransformedProblem> {
    let n = spec.dim();
    let (a, b, mu) = (spec.a(), spec.b(), spec.mu());

    if spec.num_equalities() == 0 {
        return Ok(TransformedProblem {
            e: None,
            f: Matrix::identity(n, n),
            g: mu.clone(),
            h: a.clone(),
            k: a * mu + b,
        });
    }

    let keep = independent_rows(spec.c(), spec.d(), EQUALITY_RANK_TOL);
    let c = spec.c().select_rows(keep.iter());
    let d = spec.d().select_rows(keep.iter());
    let sigma = spec.sigma();

    let c_sigma = &c * sigma;
    let gram = &c_sigma * c.transpose();
    if matrix_rank(&gram, EQUALITY_RANK_TOL) < gram.nrows() {
        return Err(Error::SingularEqualityGram);
    }
    let chol = Cholesky::new(gram).ok_or(Error::SingularEqualityGram)?;
    // (C S C^T)^-1 C S, transposed, is S C^T (C S C^T)^-1.
    let e = chol.solve(&c_sigma).transpose();

    let f = Matrix::identity(n, n) - &e * &c;
    let g = &f * mu - &e * &d;
    // Ill-conditioned Gram matrices can pass the rank test and still give a
    // g that misses the plane.
    let residual = (spec.c() * &g + spec.d()).amax();
    if residual > EQUALITY_RESIDUAL_TOL * (1.0 + spec.d().amax()) {
        return Err(Error::SingularEqualityGram);
    }
    let mut h = a * &f;
    for i in 0..h.nrows() {
        if h.row(i).norm() <= NEGLIGIBLE_ROW * a.row(i).norm() {
            h.row_mut(i).fill(0.0);
        }
    }
    let k = a * &g + b;
    Ok(TransformedProblem { e: Some(e), f, g, h, k })
}

fn augment(c: &Matrix, d: &Vector) -> Matrix {
    let mut out = Matrix::zeros(c.nrows(), c.ncols() + 1);
    out.view_mut((0, 0), (c.nrows(), c.ncols())).copy_from(c);
    out.set_column(c.ncols(), d);
    out
}
