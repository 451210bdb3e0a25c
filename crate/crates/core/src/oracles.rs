//! Independent reference samplers used to validate the chain.
//!
//! Neither sampler shares code with the latent transform or the elliptical
//! slice sampler: accept-reject draws from the unconstrained normal, and the
//! plane sampler conditions in an orthonormal basis split into the null
//! space and row space of `C`.

use nalgebra::{Cholesky, SVD};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{default_tolerance, factor_covariance, matrix_rank, Matrix, Vector};
use crate::problem::ProblemSpec;
use crate::samples::Samples;
use crate::transform::{classify_equality_system, EqualityClass, EQUALITY_RANK_TOL};

#[derive(Debug, Clone)]
pub struct RejectionReport {
    pub proposals: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub samples: Samples,
}

impl RejectionReport {
    fn new(proposals: u64, samples: Samples) -> Self {
        let accepted = samples.len() as u64;
        Self {
            proposals,
            accepted,
            acceptance_rate: if proposals == 0 {
                0.0
            } else {
                accepted as f64 / proposals as f64
            },
            samples,
        }
    }
}

/// Draws `x ~ N(mu, S)` `proposals` times and keeps draws with `A x + b >= 0`.
///
/// Problems with equality constraints are rejected: a continuous proposal
/// hits a hyperplane with probability zero.
pub fn rejection_sample<R: Rng + ?Sized>(spec: &ProblemSpec, proposals: u64, rng: &mut R) -> Result<RejectionReport> {
    if spec.num_equalities() > 0 {
        return Err(Error::InvalidArgument(
            "accept-reject sampling cannot satisfy equality constraints".into(),
        ));
    }
    let n = spec.dim();
    let m = spec.num_inequalities();
    let l = spec.factor().matrix();
    // Test A (mu + L w) + b >= 0 as (A L) w + (A mu + b) >= 0, row by row,
    // stopping at the first violated row.
    let al = spec.a() * l;
    let offset = spec.a() * spec.mu() + spec.b();
    let al_rows: Vec<Vec<f64>> = al.row_iter().map(|r| r.iter().copied().collect()).collect();

    let mut w = vec![0.0; n];
    let mut samples = Samples::new(n);
    let mut x = Vector::zeros(n);
    for _ in 0..proposals {
        for v in w.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let ok = (0..m).all(|i| {
            let dot: f64 = al_rows[i].iter().zip(&w).map(|(a, b)| a * b).sum();
            dot + offset[i] >= 0.0
        });
        if ok {
            x.copy_from(spec.mu());
            x.gemv(1.0, l, &Vector::from_column_slice(&w), 1.0);
            samples.push(x.as_slice());
        }
    }
    Ok(RejectionReport::new(proposals, samples))
}

/// Exact sampler for `x ~ N(mu, S)` conditioned on `C x + d = 0`.
#[derive(Debug, Clone)]
pub struct PlaneSampler {
    origin: Vector,
    basis: Matrix,
    mean: Vector,
    factor: Matrix,
}

impl PlaneSampler {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        let (c, d) = (spec.c(), spec.d());
        if c.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "the plane sampler needs equality constraints".into(),
            ));
        }
        match classify_equality_system(c, d, EQUALITY_RANK_TOL) {
            EqualityClass::Infinite => {}
            other => {
                return Err(Error::InvalidArgument(format!(
                    "equality system must have infinitely many solutions, found {other:?}"
                )))
            }
        }
        let n = spec.dim();
        let rank = matrix_rank(c, EQUALITY_RANK_TOL);

        // Right singular vectors of C: the first `rank` span its row space,
        // the rest its null space.
        let mut padded = Matrix::zeros(c.nrows().max(n), n);
        padded.view_mut((0, 0), c.shape()).copy_from(c);
        let svd = SVD::new(padded, false, true);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let v_t = svd.v_t.expect("v_t requested");
        let q = Matrix::from_fn(n, n, |i, j| v_t[(order[j], i)]);
        let null_space = q.columns(rank, n - rank).into_owned();

        let c_svd = SVD::new(c.clone(), true, true);
        let origin = c_svd
            .solve(&(-d), EQUALITY_RANK_TOL * c_svd.singular_values.max())
            .expect("u and v_t requested");

        // Coordinates (w, z) = Q^T (x - origin), row space first; the plane
        // is w = 0.
        let shift = q.transpose() * (spec.mu() - &origin);
        let cov = q.transpose() * spec.sigma() * &q;
        let q_dim = n - rank;
        let mw = shift.rows(0, rank).into_owned();
        let mz = shift.rows(rank, q_dim).into_owned();
        let s_ww = cov.view((0, 0), (rank, rank)).into_owned();
        let s_zw = cov.view((rank, 0), (q_dim, rank)).into_owned();
        let s_zz = cov.view((rank, rank), (q_dim, q_dim)).into_owned();

        let chol = Cholesky::new(s_ww).ok_or(Error::SingularEqualityGram)?;
        let gain = chol.solve(&s_zw.transpose()).transpose();
        let mean = &mz - &gain * &mw;
        let mut cond_cov = &s_zz - &gain * s_zw.transpose();
        cond_cov = (&cond_cov + cond_cov.transpose()) * 0.5;
        let factor = factor_covariance(&cond_cov, default_tolerance(spec.sigma()).max(1e-12))?;

        Ok(Self {
            origin,
            basis: null_space,
            mean,
            factor: factor.matrix().clone(),
        })
    }

    /// Dimension of the plane.
    pub fn plane_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn conditional_mean(&self) -> Vector {
        &self.origin + &self.basis * &self.mean
    }

    pub fn conditional_covariance(&self) -> Matrix {
        let bl = &self.basis * &self.factor;
        &bl * bl.transpose()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, u: &mut Vector, x: &mut Vector) {
        for v in u.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let z = &self.mean + &self.factor * &*u;
        x.copy_from(&self.origin);
        x.gemv(1.0, &self.basis, &z, 1.0);
    }
}

/// Draws `proposals` points from the conditional normal on `C x + d = 0`.
/// With `filter = Some((A, b))` only points with `A x + b >= 0` are kept.
pub fn conditional_direct_sample<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    proposals: u64,
    rng: &mut R,
    filter: Option<(&Matrix, &Vector)>,
) -> Result<RejectionReport> {
    let sampler = PlaneSampler::new(spec)?;
    let n = spec.dim();
    if let Some((a, b)) = filter {
        if a.ncols() != n || a.nrows() != b.len() {
            return Err(Error::DimensionMismatch(
                "filter shape does not match the problem".into(),
            ));
        }
    }
    let mut u = Vector::zeros(sampler.plane_dim());
    let mut x = Vector::zeros(n);
    let mut samples = Samples::new(n);
    for _ in 0..proposals {
        sampler.sample_into(rng, &mut u, &mut x);
        let keep = match filter {
            None => true,
            Some((a, b)) => (0..a.nrows()).all(|i| a.row(i).dot(&x.transpose()) + b[i] >= 0.0),
        };
        if keep {
            samples.push(x.as_slice());
        }
    }
    Ok(RejectionReport::new(proposals, samples))
}

/// The invertible change of coordinates `x' = T x + offset` that maps the
/// validation plane onto `x'_3 = x'_4 = 0`.
#[derive(Debug, Clone)]
pub struct ValidationTransform {
    t: Matrix,
    offset: Vector,
}

impl ValidationTransform {
    pub fn new(t: Matrix, offset: Vector) -> Result<Self> {
        let n = offset.len();
        if t.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "T is {}x{}, offset has length {n}",
                t.nrows(),
                t.ncols()
            )));
        }
        if matrix_rank(&t, 1e-12) < n {
            return Err(Error::InvalidArgument("validation transform T is singular".into()));
        }
        Ok(Self { t, offset })
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.t * x + &self.offset
    }

    /// `T^-1 (x' - offset)`.
    pub fn invert(&self, x_prime: &Vector) -> Vector {
        self.t
            .clone()
            .lu()
            .solve(&(x_prime - &self.offset))
            .expect("T was checked to be invertible")
    }
}

/// First two components of `T x + offset`.
pub fn pentagon_plane_coords(x: &Vector, vt: &ValidationTransform) -> (f64, f64) {
    let xp = vt.apply(x);
    (xp[0], xp[1])
}
