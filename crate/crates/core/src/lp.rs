//! Dense two-phase simplex for small linear programs.
//!
//! Free variables are split into positive and negative parts. Pricing uses
//! Dantzig's rule and switches to Bland's rule after 100 consecutive
//! degenerate pivots. The total pivot count is capped at
//! `50 * (columns + rows)` of the standard-form tableau.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-9;
const STALL_LIMIT: usize = 100;
const ITERATION_FACTOR: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `optimize c^T x` subject to row constraints, with each variable either
/// nonnegative or free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    kinds: Vec<VarKind>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective at `x`; meaningful only when `status` is `Optimal`.
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl LinearProgram {
    /// New program over `objective.len()` nonnegative variables.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            kinds: vec![VarKind::NonNegative; n],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.kinds[var] = VarKind::Free;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(
            coeffs.len(),
            self.num_vars(),
            "constraint width must match variable count"
        );
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn kind(&self, var: usize) -> VarKind {
        self.kinds[var]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self) -> Result<LpSolution> {
        solve_lp(self)
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.num_vars();
    if n == 0 {
        return Err(Error::InvalidArgument("linear program has no variables".into()));
    }
    let finite = lp.objective.iter().all(|v| v.is_finite())
        && lp
            .constraints
            .iter()
            .all(|c| c.rhs.is_finite() && c.coeffs.iter().all(|v| v.is_finite()));
    if !finite {
        return Err(Error::NonFinite("linear program"));
    }

    let mut tableau = match Tableau::build(lp) {
        Some(t) => t,
        None => return Ok(infeasible(n)),
    };

    if !tableau.phase_one()? {
        return Ok(infeasible(n).with_iterations(tableau.iterations));
    }
    let bounded = tableau.phase_two(lp)?;
    let x = tableau.extract(lp);
    let status = if bounded {
        LpStatus::Optimal
    } else {
        LpStatus::Unbounded
    };
    let objective = if bounded {
        lp.objective_value(&x)
    } else {
        match lp.sense {
            Sense::Minimize => f64::NEG_INFINITY,
            Sense::Maximize => f64::INFINITY,
        }
    };
    Ok(LpSolution {
        status,
        objective,
        x,
        iterations: tableau.iterations,
    })
}

fn infeasible(n: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        objective: f64::NAN,
        x: vec![f64::NAN; n],
        iterations: 0,
    }
}

impl LpSolution {
    fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Positive(usize),
    Negative(usize),
    Slack,
    Artificial,
}

struct Tableau {
    /// Row-major `(rows + 1) x (cols + 1)`; last row is the reduced-cost row,
    /// last column the right-hand side. The objective cell holds `-z`.
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    columns: Vec<Column>,
    basis: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    /// Standard form with nonnegative right-hand sides. Returns `None` if a
    /// constraint with all-zero coefficients is violated.
    fn build(lp: &LinearProgram) -> Option<Self> {
        let mut columns = Vec::new();
        for (j, kind) in lp.kinds.iter().enumerate() {
            columns.push(Column::Positive(j));
            if *kind == VarKind::Free {
                columns.push(Column::Negative(j));
            }
        }
        let structural = columns.len();

        struct Row {
            coeffs: Vec<f64>,
            relation: Relation,
            rhs: f64,
        }
        let mut rows = Vec::new();
        for c in &lp.constraints {
            let scale = c.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                let ok = match c.relation {
                    Relation::LessEq => 0.0 <= c.rhs + FEASIBILITY_TOL,
                    Relation::GreaterEq => 0.0 >= c.rhs - FEASIBILITY_TOL,
                    Relation::Equal => c.rhs.abs() <= FEASIBILITY_TOL,
                };
                if !ok {
                    return None;
                }
                continue;
            }
            let mut coeffs = Vec::with_capacity(structural);
            for col in &columns[..structural] {
                coeffs.push(match *col {
                    Column::Positive(j) => c.coeffs[j] / scale,
                    Column::Negative(j) => -c.coeffs[j] / scale,
                    _ => unreachable!(),
                });
            }
            let mut relation = c.relation;
            let mut rhs = c.rhs / scale;
            if rhs < 0.0 {
                coeffs.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
                relation = match relation {
                    Relation::LessEq => Relation::GreaterEq,
                    Relation::GreaterEq => Relation::LessEq,
                    Relation::Equal => Relation::Equal,
                };
            }
            rows.push(Row { coeffs, relation, rhs });
        }

        let num_slack = rows.iter().filter(|r| r.relation != Relation::Equal).count();
        let num_art = rows.iter().filter(|r| r.relation != Relation::LessEq).count();
        let cols = structural + num_slack + num_art;
        columns.extend(std::iter::repeat_n(Column::Slack, num_slack));
        columns.extend(std::iter::repeat_n(Column::Artificial, num_art));

        let m = rows.len();
        let width = cols + 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];
        let mut next_slack = structural;
        let mut next_art = structural + num_slack;
        for (i, row) in rows.iter().enumerate() {
            let r = &mut data[i * width..(i + 1) * width];
            r[..structural].copy_from_slice(&row.coeffs);
            r[cols] = row.rhs;
            match row.relation {
                Relation::LessEq => {
                    r[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::GreaterEq => {
                    r[next_slack] = -1.0;
                    next_slack += 1;
                    r[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Equal => {
                    r[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Some(Self {
            data,
            rows: m,
            cols,
            columns,
            basis,
            iterations: 0,
            max_iterations: ITERATION_FACTOR * (cols + m),
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn is_artificial(&self, j: usize) -> bool {
        self.columns[j] == Column::Artificial
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let p = self.at(pr, pc);
        for v in &mut self.data[pr * width..(pr + 1) * width] {
            *v /= p;
        }
        self.data[pr * width + pc] = 1.0;
        let pivot_row: Vec<f64> = self.data[pr * width..(pr + 1) * width].to_vec();
        for i in 0..=self.rows {
            if i == pr {
                continue;
            }
            let factor = self.data[i * width + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.data[i * width..(i + 1) * width];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Loads `costs` into the reduced-cost row and prices out the basis.
    fn set_objective(&mut self, costs: &[f64]) {
        let width = self.cols + 1;
        let obj = self.obj_row();
        self.data[obj * width..].fill(0.0);
        self.data[obj * width..obj * width + self.cols].copy_from_slice(costs);
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..width {
                self.data[obj * width + j] -= cb * self.data[i * width + j];
            }
        }
    }

    /// Runs simplex iterations on the current objective. Returns `false`
    /// when the objective is unbounded below.
    fn iterate(&mut self, allow_artificial: bool) -> Result<bool> {
        let mut stalled = 0usize;
        let mut bland = false;
        loop {
            let obj = self.obj_row();
            let entering = {
                let candidates = (0..self.cols)
                    .filter(|&j| allow_artificial || !self.is_artificial(j))
                    .filter(|&j| self.at(obj, j) < -COST_TOL);
                if bland {
                    candidates.min()
                } else {
                    candidates.min_by(|&a, &b| self.at(obj, a).total_cmp(&self.at(obj, b)))
                }
            };
            let Some(pc) = entering else {
                return Ok(true);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, pc);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie || tie && self.basis[i] < self.basis[best] {
                            Some((i, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((pr, ratio)) = leaving else {
                return Ok(false);
            };

            if self.iterations >= self.max_iterations {
                return Err(Error::CyclingGuardExceeded(self.max_iterations));
            }
            self.iterations += 1;
            if ratio <= 1e-12 {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
            self.pivot(pr, pc);
        }
    }

    /// Minimizes the sum of artificials. Returns `false` if the program is
    /// infeasible. On success no artificial variable remains basic.
    fn phase_one(&mut self) -> Result<bool> {
        let costs: Vec<f64> = (0..self.cols)
            .map(|j| if self.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        if costs.iter().all(|c| *c == 0.0) {
            return Ok(true);
        }
        self.set_objective(&costs);
        self.iterate(true)?;
        let infeasibility = -self.at(self.obj_row(), self.cols);
        if infeasibility > FEASIBILITY_TOL {
            return Ok(false);
        }

        let mut i = 0;
        while i < self.rows {
            if !self.is_artificial(self.basis[i]) {
                i += 1;
                continue;
            }
            let replacement = (0..self.cols)
                .filter(|&j| !self.is_artificial(j))
                .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()))
                .filter(|&j| self.at(i, j).abs() > PIVOT_TOL);
            match replacement {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => self.remove_row(i),
            }
        }
        Ok(true)
    }

    fn remove_row(&mut self, i: usize) {
        let width = self.cols + 1;
        self.data.drain(i * width..(i + 1) * width);
        self.basis.remove(i);
        self.rows -= 1;
    }

    fn phase_two(&mut self, lp: &LinearProgram) -> Result<bool> {
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let costs: Vec<f64> = self
            .columns
            .iter()
            .map(|col| match *col {
                Column::Positive(j) => sign * lp.objective[j],
                Column::Negative(j) => -sign * lp.objective[j],
                Column::Slack | Column::Artificial => 0.0,
            })
            .collect();
        self.set_objective(&costs);
        self.iterate(false)
    }

    fn extract(&self, lp: &LinearProgram) -> Vec<f64> {
        let mut x = vec![0.0; lp.num_vars()];
        for (i, &col) in self.basis.iter().enumerate() {
            let v = self.rhs(i).max(0.0);
            match self.columns[col] {
                Column::Positive(j) => x[j] += v,
                Column::Negative(j) => x[j] -= v,
                _ => {}
            }
        }
        x
    }
}
