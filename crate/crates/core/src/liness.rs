//! Rejection-free elliptical slice sampling for a zero-mean normal
//! restricted to `H y + k >= 0`.
//!
//! Each step draws an auxiliary `nu ~ N(0, S)` and moves along the ellipse
//! `y cos(t) + nu sin(t)`. Along that ellipse constraint `i` reads
//! `r_i cos(t - phi_i) + k_i >= 0`, so the feasible angles are an
//! intersection of arcs which can be computed exactly; the new angle is
//! drawn uniformly from that set.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{CovarianceFactor, Vector};
use crate::samples::Samples;
use crate::transform::TransformedProblem;

/// A chain state may violate a constraint by at most this much.
pub const STATE_TOL: f64 = 1e-9;

/// Closed angle intervals inside `[-pi, pi)`, sorted and pairwise disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    intervals: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn full() -> Self {
        Self {
            intervals: vec![(-PI, PI)],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.measure() <= 0.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= theta && theta <= hi)
    }

    /// Maps `u` in `[0, measure)` to an angle, walking the intervals in order.
    pub fn locate(&self, u: f64) -> f64 {
        let mut rest = u;
        for &(lo, hi) in &self.intervals {
            let len = hi - lo;
            if rest < len {
                return lo + rest;
            }
            rest -= len;
        }
        let (_, hi) = *self.intervals.last().expect("non-empty arc set");
        hi
    }
}

/// Feasible angles `{t : H (y cos t + nu sin t) + k >= 0}`.
///
/// `hy` and `hnu` are the precomputed products `H y` and `H nu`.
pub fn active_arcs_from_products(hy: &[f64], hnu: &[f64], k: &[f64]) -> Result<ArcSet> {
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(4 * k.len());
    let mut active = 0i32;
    for ((&p, &q), &ki) in hy.iter().zip(hnu).zip(k) {
        let r = p.hypot(q);
        if r <= ki {
            continue;
        }
        if ki < -r {
            return Err(Error::EmptyArcSet);
        }
        active += 1;
        let phi = q.atan2(p);
        let half = (-ki / r).clamp(-1.0, 1.0).acos();
        let (lo, hi) = (phi - half, phi + half);
        let mut push = |a: f64, b: f64| {
            events.push((a, 1));
            events.push((b, -1));
        };
        if lo < -PI {
            push(lo + 2.0 * PI, PI);
            push(-PI, hi);
        } else if hi >= PI {
            push(lo, PI);
            push(-PI, hi - 2.0 * PI);
        } else {
            push(lo, hi);
        }
    }
    if active == 0 {
        return Ok(ArcSet::full());
    }

    // Openings sort before closings at equal angles so touching closed
    // intervals are counted as overlapping.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut intervals = Vec::new();
    let mut depth = 0;
    let mut open = 0.0;
    for (angle, delta) in events {
        if delta > 0 {
            depth += 1;
            if depth == active {
                open = angle;
            }
        } else {
            if depth == active && angle > open {
                intervals.push((open, angle));
            }
            depth -= 1;
        }
    }
    if intervals.is_empty() {
        return Err(Error::EmptyArcSet);
    }
    Ok(ArcSet { intervals })
}

pub fn active_arcs(y: &Vector, nu: &Vector, t: &TransformedProblem) -> Result<ArcSet> {
    let hy = &t.h * y;
    let hnu = &t.h * nu;
    active_arcs_from_products(hy.as_slice(), hnu.as_slice(), t.k.as_slice())
}

/// Current latent sample together with the generator that drives the chain.
#[derive(Debug, Clone)]
pub struct ChainState<R> {
    pub y: Vector,
    pub rng: R,
    pub step_count: u64,
    hy: Vector,
}

impl<R: Rng> ChainState<R> {
    /// Starts a chain at `y`, which must satisfy `H y + k >= -STATE_TOL`.
    pub fn new(y: Vector, rng: R, t: &TransformedProblem) -> Result<Self> {
        let hy = &t.h * &y;
        let state = Self {
            y,
            rng,
            step_count: 0,
            hy,
        };
        state.check(t)?;
        Ok(state)
    }

    fn check(&self, t: &TransformedProblem) -> Result<()> {
        let slack = self
            .hy
            .iter()
            .zip(t.k.iter())
            .map(|(a, b)| a + b)
            .fold(f64::INFINITY, f64::min);
        if slack < -STATE_TOL {
            return Err(Error::InfeasibleChainState { slack });
        }
        Ok(())
    }
}

/// Reusable buffers for [`liness_step`].
#[derive(Debug, Clone)]
pub struct StepScratch {
    w: Vector,
    nu: Vector,
    hnu: Vector,
}

impl StepScratch {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            w: Vector::zeros(n),
            nu: Vector::zeros(n),
            hnu: Vector::zeros(m),
        }
    }
}

/// Advances the chain by one rejection-free step: one `nu` draw and one
/// uniform angle draw.
pub fn liness_step<R: Rng>(
    state: &mut ChainState<R>,
    t: &TransformedProblem,
    factor: &CovarianceFactor,
    scratch: &mut StepScratch,
) -> Result<()> {
    factor.sample_into(&mut state.rng, &mut scratch.w, &mut scratch.nu);
    scratch.hnu.gemv(1.0, &t.h, &scratch.nu, 0.0);
    let arcs = active_arcs_from_products(state.hy.as_slice(), scratch.hnu.as_slice(), t.k.as_slice())?;
    let u: f64 = state.rng.random::<f64>() * arcs.measure();
    let theta = arcs.locate(u);
    let (s, c) = theta.sin_cos();

    state.y.scale_mut(c);
    state.y.axpy(s, &scratch.nu, 1.0);
    // Recompute rather than rotate H y so rounding does not accumulate.
    state.hy.gemv(1.0, &t.h, &state.y, 0.0);
    state.step_count += 1;
    state.check(t)
}

/// Runs `n` steps from `y0` and returns every visited state after `y0`.
pub fn run_chain<R: Rng>(
    t: &TransformedProblem,
    factor: &CovarianceFactor,
    y0: Vector,
    n: usize,
    rng: R,
) -> Result<Samples> {
    run_chain_with(t, factor, y0, n, 0, 1, rng)
}

/// As [`run_chain`], discarding the first `burn_in` states and keeping every
/// `thin`-th state afterwards.
pub fn run_chain_with<R: Rng>(
    t: &TransformedProblem,
    factor: &CovarianceFactor,
    y0: Vector,
    n: usize,
    burn_in: usize,
    thin: usize,
    rng: R,
) -> Result<Samples> {
    if thin == 0 {
        return Err(Error::InvalidArgument("thin must be at least 1".into()));
    }
    let dim = y0.len();
    let mut state = ChainState::new(y0, rng, t)?;
    let mut scratch = StepScratch::new(dim, t.num_inequalities());
    for _ in 0..burn_in {
        liness_step(&mut state, t, factor, &mut scratch)?;
    }
    let mut out = Samples::with_capacity(dim, n);
    while out.len() < n {
        for _ in 0..thin {
            liness_step(&mut state, t, factor, &mut scratch)?;
        }
        out.push(state.y.as_slice());
    }
    Ok(out)
}
