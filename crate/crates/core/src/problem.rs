//! The constrained sampling problem `x ~ N(mu, sigma)` subject to
//! `A x + b >= 0` and `C x + d = 0`.

use crate::error::{Error, Result};
use crate::linalg::{default_tolerance, factor_covariance, is_finite, CovarianceFactor, Matrix, Vector};

/// A validated problem definition.
///
/// Either constraint block may be empty (`m = 0` or `p = 0`); the empty
/// blocks are stored as `0 x n` matrices and length-0 vectors.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    mu: Vector,
    sigma: Matrix,
    a: Matrix,
    b: Vector,
    c: Matrix,
    d: Vector,
    factor: CovarianceFactor,
}

impl ProblemSpec {
    pub fn new(
        mu: Vector,
        sigma: Matrix,
        inequalities: Option<(Matrix, Vector)>,
        equalities: Option<(Matrix, Vector)>,
    ) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("dimension n must be at least 1".into()));
        }
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "sigma is {}x{}, expected {n}x{n}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if !mu.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("mu"));
        }
        let (a, b) = inequalities.unwrap_or_else(|| (Matrix::zeros(0, n), Vector::zeros(0)));
        let (c, d) = equalities.unwrap_or_else(|| (Matrix::zeros(0, n), Vector::zeros(0)));
        check_block("A", "b", &a, &b, n)?;
        check_block("C", "d", &c, &d, n)?;
        let factor = factor_covariance(&sigma, default_tolerance(&sigma))?;
        Ok(Self {
            mu,
            sigma,
            a,
            b,
            c,
            d,
            factor,
        })
    }

    pub fn with_inequalities(mu: Vector, sigma: Matrix, a: Matrix, b: Vector) -> Result<Self> {
        Self::new(mu, sigma, Some((a, b)), None)
    }

    pub fn with_equalities(mu: Vector, sigma: Matrix, c: Matrix, d: Vector) -> Result<Self> {
        Self::new(mu, sigma, None, Some((c, d)))
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Number of inequality rows `m`.
    pub fn num_inequalities(&self) -> usize {
        self.a.nrows()
    }

    /// Number of equality rows `p`.
    pub fn num_equalities(&self) -> usize {
        self.c.nrows()
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &Vector {
        &self.d
    }

    pub fn factor(&self) -> &CovarianceFactor {
        &self.factor
    }

    /// Copy of this problem with the equality block removed.
    pub fn without_equalities(&self) -> Self {
        let n = self.dim();
        Self {
            c: Matrix::zeros(0, n),
            d: Vector::zeros(0),
            ..self.clone()
        }
    }

    /// Copy of this problem with the inequality block removed.
    pub fn without_inequalities(&self) -> Self {
        let n = self.dim();
        Self {
            a: Matrix::zeros(0, n),
            b: Vector::zeros(0),
            ..self.clone()
        }
    }

    /// Smallest entry of `A x + b`, or `+inf` when `m = 0`.
    pub fn min_inequality_slack(&self, x: &[f64]) -> f64 {
        let x = nalgebra::DVectorView::from_slice(x, self.dim());
        let slack = &self.a * x + &self.b;
        slack.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |C x + d|`, or 0 when `p = 0`.
    pub fn equality_residual(&self, x: &[f64]) -> f64 {
        let x = nalgebra::DVectorView::from_slice(x, self.dim());
        let r = &self.c * x + &self.d;
        r.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

fn check_block(mat: &'static str, vec: &'static str, m: &Matrix, v: &Vector, n: usize) -> Result<()> {
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{mat} has {} columns, expected {n}",
            m.ncols()
        )));
    }
    if m.nrows() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "{mat} has {} rows but {vec} has length {}",
            m.nrows(),
            v.len()
        )));
    }
    if !is_finite(m) {
        return Err(Error::NonFinite(mat));
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite(vec));
    }
    Ok(())
}
