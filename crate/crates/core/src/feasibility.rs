//! Locating a starting point for the chain on `{y : H y + k >= 0}`.
//!
//! The phase-one program
//!
//! ```text
//! minimize sum(a)  subject to  H y + k + a >= 0,  a >= 0,  y free
//! ```
//!
//! is always feasible; a positive optimum means the region is empty. When it
//! is zero a second program maximizes the uniform normalized slack `s`
//! (capped at 1). A positive `s` gives an interior start; a zero `s` is
//! resolved by bounding every coordinate with range programs.
//!
//! The slack-maximizing vertex can lie far out in the tail of the normal
//! (for thin unbounded regions, arbitrarily far), so the start is
//! re-centred: among points whose normalized slack is at least a fixed
//! fraction of the optimum, the one with the smallest L1 norm is used.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense};

/// Absolute tolerance on the phase-one optimum and on the Chebyshev radius.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Coordinate ranges at or below this width (relative to `1 + |y|`) count
/// as a single point.
const POINT_WIDTH_TOL: f64 = 1e-7;

/// Fraction of the maximal slack the re-centred start must keep.
pub const START_SLACK_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult {
    /// No `y` satisfies the constraints; `violation` is the phase-one optimum.
    Infeasible { violation: f64 },
    /// Exactly one `y` satisfies the constraints.
    PointMass(Vector),
    /// The region has an interior. `chebyshev_radius` is the largest
    /// inscribed ball radius (capped at 1); `start` is the centre of a ball of
    /// radius `start_radius <= chebyshev_radius` inside the region.
    FullDimensional {
        start: Vector,
        chebyshev_radius: f64,
        start_radius: f64,
    },
}

impl FeasibilityResult {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Infeasible { .. } => "Infeasible",
            Self::PointMass(_) => "PointMass",
            Self::FullDimensional { .. } => "FullDimensional",
        }
    }
}

/// The phase-one model over variables `(y_1..y_n, a_1..a_m)`.
pub fn phase_one_model(h: &Matrix, k: &Vector) -> LinearProgram {
    let (m, n) = h.shape();
    let mut objective = vec![0.0; n + m];
    objective[n..].fill(1.0);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..n {
        lp.set_free(j);
    }
    for i in 0..m {
        let mut row = vec![0.0; n + m];
        row[..n].iter_mut().zip(h.row(i).iter()).for_each(|(r, v)| *r = *v);
        row[n + i] = 1.0;
        lp.add_constraint(row, Relation::GreaterEq, -k[i]);
    }
    lp
}

/// Maximize `s` subject to `H y + k >= s * ||h_i||` and `s <= 1`, over
/// variables `(y_1..y_n, s)`. Rows of `H` that are exactly zero are left out.
pub fn max_slack_model(h: &Matrix, k: &Vector) -> LinearProgram {
    let (m, n) = h.shape();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for j in 0..=n {
        lp.set_free(j);
    }
    for i in 0..m {
        let norm = h.row(i).norm();
        if norm == 0.0 {
            continue;
        }
        let mut row: Vec<f64> = h.row(i).iter().map(|v| v / norm).collect();
        row.push(-1.0);
        lp.add_constraint(row, Relation::GreaterEq, -k[i] / norm);
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    lp.add_constraint(cap, Relation::LessEq, 1.0);
    lp
}

pub fn find_feasible_point(h: &Matrix, k: &Vector) -> Result<FeasibilityResult> {
    let (m, n) = h.shape();
    if k.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "H has {m} rows but k has length {}",
            k.len()
        )));
    }
    if m == 0 {
        return Ok(FeasibilityResult::FullDimensional {
            start: Vector::zeros(n),
            chebyshev_radius: 1.0,
            start_radius: 1.0,
        });
    }

    let phase_one = phase_one_model(h, k).solve()?;
    if phase_one.status != LpStatus::Optimal {
        return Err(Error::InvalidArgument(format!(
            "phase-one program reported {:?}",
            phase_one.status
        )));
    }
    let violation: f64 = phase_one.x[n..].iter().sum();
    if violation > FEASIBILITY_TOL {
        return Ok(FeasibilityResult::Infeasible { violation });
    }

    let slack = max_slack_model(h, k).solve()?;
    if slack.status == LpStatus::Optimal && slack.objective > FEASIBILITY_TOL {
        let chebyshev_radius = slack.objective;
        let radius = chebyshev_radius * START_SLACK_FRACTION;
        let centred = centring_model(h, k, radius).solve()?;
        let (start, start_radius) = if centred.status == LpStatus::Optimal {
            (Vector::from_column_slice(&centred.x[..n]), radius)
        } else {
            (Vector::from_column_slice(&slack.x[..n]), chebyshev_radius)
        };
        return Ok(FeasibilityResult::FullDimensional {
            start,
            chebyshev_radius,
            start_radius,
        });
    }

    let mut centre = Vector::zeros(n);
    let mut widest = 0.0f64;
    let mut is_point = true;
    for j in 0..n {
        let mut bounds = [0.0; 2];
        for (slot, sense) in [Sense::Minimize, Sense::Maximize].into_iter().enumerate() {
            let sol = range_model(h, k, j, sense).solve()?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::DegenerateRegion { width: f64::INFINITY });
            }
            bounds[slot] = sol.objective;
        }
        let width = bounds[1] - bounds[0];
        let mid = 0.5 * (bounds[0] + bounds[1]);
        widest = widest.max(width);
        if width > POINT_WIDTH_TOL * (1.0 + mid.abs()) {
            is_point = false;
        }
        centre[j] = mid;
    }
    if is_point {
        Ok(FeasibilityResult::PointMass(centre))
    } else {
        Err(Error::DegenerateRegion { width: widest })
    }
}

/// Minimize `sum(t)` subject to `-t <= y <= t` and `H y + k >= radius * ||h_i||`,
/// over variables `(y_1..y_n, t_1..t_n)`.
pub fn centring_model(h: &Matrix, k: &Vector, radius: f64) -> LinearProgram {
    let (m, n) = h.shape();
    let mut objective = vec![0.0; 2 * n];
    objective[n..].fill(1.0);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..n {
        lp.set_free(j);
    }
    for i in 0..m {
        let norm = h.row(i).norm();
        if norm == 0.0 {
            continue;
        }
        let mut row: Vec<f64> = h.row(i).iter().map(|v| v / norm).collect();
        row.resize(2 * n, 0.0);
        lp.add_constraint(row, Relation::GreaterEq, radius - k[i] / norm);
    }
    for j in 0..n {
        let mut upper = vec![0.0; 2 * n];
        upper[j] = 1.0;
        upper[n + j] = -1.0;
        lp.add_constraint(upper, Relation::LessEq, 0.0);
        let mut lower = vec![0.0; 2 * n];
        lower[j] = 1.0;
        lower[n + j] = 1.0;
        lp.add_constraint(lower, Relation::GreaterEq, 0.0);
    }
    lp
}

fn range_model(h: &Matrix, k: &Vector, coord: usize, sense: Sense) -> LinearProgram {
    let (m, n) = h.shape();
    let mut objective = vec![0.0; n];
    objective[coord] = 1.0;
    let mut lp = LinearProgram::new(sense, objective);
    for j in 0..n {
        lp.set_free(j);
    }
    for i in 0..m {
        lp.add_constraint(h.row(i).iter().copied().collect(), Relation::GreaterEq, -k[i]);
    }
    lp
}
