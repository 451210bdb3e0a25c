//! End-to-end sampling: dispatches on which constraint blocks are present.
//!
//! | equalities | inequalities | recipe                                              |
//! |------------|--------------|-----------------------------------------------------|
//! | no         | no           | direct draws `x = y + mu`                           |
//! | yes        | no           | classify `C x + d = 0`, then direct draws `F y + g` |
//! | no         | yes          | phase-one LP, then the elliptical slice chain       |
//! | yes        | yes          | transform, phase-one LP on `(H, k)`, then the chain |

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::feasibility::{find_feasible_point, FeasibilityResult};
use crate::linalg::{CovarianceFactor, Vector};
use crate::liness::run_chain_with;
use crate::problem::ProblemSpec;
use crate::samples::Samples;
use crate::transform::{
    build_transform, classify_equality_system, EqualityClass, TransformedProblem, EQUALITY_RANK_TOL,
};
use crate::RandomSource;

/// Tolerance on `A x + b >= 0` for a point mass found by the equality solve.
const POINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    Unconstrained,
    EqualityOnly,
    InequalityOnly,
    Combined,
}

impl Recipe {
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        match (spec.num_equalities() > 0, spec.num_inequalities() > 0) {
            (false, false) => Self::Unconstrained,
            (true, false) => Self::EqualityOnly,
            (false, true) => Self::InequalityOnly,
            (true, true) => Self::Combined,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Unconstrained => "unconstrained",
            Self::EqualityOnly => "equality-only",
            Self::InequalityOnly => "inequality-only",
            Self::Combined => "equality-and-inequality",
        }
    }

    /// Whether the recipe produces independent draws rather than a chain.
    pub fn is_iid(&self) -> bool {
        matches!(self, Self::Unconstrained | Self::EqualityOnly)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImpossibleReason {
    /// `C x + d = 0` has no solution.
    EqualityNoSolution,
    /// The phase-one optimum is positive.
    InequalityInfeasible { violation: f64 },
    /// The equalities pin a single point which violates an inequality.
    PointViolatesInequalities { slack: f64 },
}

impl fmt::Display for ImpossibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EqualityNoSolution => {
                write!(f, "equality constraints have zero solutions (inconsistent system)")
            }
            Self::InequalityInfeasible { violation } => write!(
                f,
                "inequality constraints admit no point (phase-one optimum {violation:e} > 0)"
            ),
            Self::PointViolatesInequalities { slack } => write!(
                f,
                "the unique solution of the equalities violates the inequalities (slack {slack:e})"
            ),
        }
    }
}

/// What the problem reduces to before any sampling happens.
#[derive(Debug, Clone)]
pub enum Plan {
    Impossible(ImpossibleReason),
    PointMass(Vector),
    /// Independent draws `x = F y + g`, `y ~ N(0, S)`.
    Direct(TransformedProblem),
    /// Elliptical slice chain on the latent inequalities.
    Chain {
        transform: TransformedProblem,
        start: Vector,
        chebyshev_radius: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub recipe: Recipe,
    pub equality: Option<EqualityClass>,
    pub feasibility: Option<FeasibilityResult>,
    pub plan: Plan,
}

/// Resolves the degenerate cases and builds everything sampling needs.
pub fn classify(spec: &ProblemSpec) -> Result<Classification> {
    let recipe = Recipe::for_spec(spec);
    let mut equality = None;
    if spec.num_equalities() > 0 {
        let class = classify_equality_system(spec.c(), spec.d(), EQUALITY_RANK_TOL);
        equality = Some(class.clone());
        match class {
            EqualityClass::NoSolution => {
                return Ok(Classification {
                    recipe,
                    equality,
                    feasibility: None,
                    plan: Plan::Impossible(ImpossibleReason::EqualityNoSolution),
                })
            }
            EqualityClass::Unique(x) => {
                let slack = spec.min_inequality_slack(x.as_slice());
                let plan = if slack >= -POINT_TOL {
                    Plan::PointMass(x)
                } else {
                    Plan::Impossible(ImpossibleReason::PointViolatesInequalities { slack })
                };
                return Ok(Classification {
                    recipe,
                    equality,
                    feasibility: None,
                    plan,
                });
            }
            EqualityClass::Infinite => {}
        }
    }

    let transform = build_transform(spec)?;
    if spec.num_inequalities() == 0 {
        return Ok(Classification {
            recipe,
            equality,
            feasibility: None,
            plan: Plan::Direct(transform),
        });
    }

    let feasibility = find_feasible_point(&transform.h, &transform.k)?;
    let plan = match &feasibility {
        FeasibilityResult::Infeasible { violation } => {
            Plan::Impossible(ImpossibleReason::InequalityInfeasible { violation: *violation })
        }
        FeasibilityResult::PointMass(y) => Plan::PointMass(transform.map_latent(y)),
        FeasibilityResult::FullDimensional {
            start,
            chebyshev_radius,
            ..
        } => Plan::Chain {
            start: start.clone(),
            chebyshev_radius: *chebyshev_radius,
            transform,
        },
    };
    Ok(Classification {
        recipe,
        equality,
        feasibility: Some(feasibility),
        plan,
    })
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Impossible(ImpossibleReason),
    PointMassAt(Vector),
    Samples(Samples),
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub recipe: Recipe,
    pub equality: Option<EqualityClass>,
    pub feasibility: Option<FeasibilityResult>,
    /// Total chain steps taken across all chains (0 for direct draws).
    pub chain_length: usize,
    pub chains: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SamplingOutcome {
    pub outcome: Outcome,
    pub report: RunReport,
}

impl SamplingOutcome {
    pub fn samples(&self) -> Option<&Samples> {
        match &self.outcome {
            Outcome::Samples(s) => Some(s),
            _ => None,
        }
    }

    /// `n` rows: the samples themselves, or `n` copies of a point mass.
    pub fn to_rows(&self, n: usize) -> Option<Samples> {
        match &self.outcome {
            Outcome::Samples(s) => Some(s.clone()),
            Outcome::PointMassAt(x) => {
                let mut s = Samples::with_capacity(x.len(), n);
                (0..n).for_each(|_| s.push(x.as_slice()));
                Some(s)
            }
            Outcome::Impossible(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Chain steps discarded before the first kept sample.
    pub burn_in: usize,
    /// Keep every `thin`-th chain state.
    pub thin: usize,
    /// Independent chains, chain `i` seeded with `seed + i`.
    pub chains: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            burn_in: 0,
            thin: 1,
            chains: 1,
        }
    }
}

/// Draws `n` samples of `x` with a single chain driven by `rng`.
pub fn sample_constrained<R: Rng>(spec: &ProblemSpec, n: usize, rng: &mut R) -> Result<SamplingOutcome> {
    let started = Instant::now();
    let class = classify(spec)?;
    let opts = SamplerOptions::default();
    let (outcome, steps) = execute(&class.plan, spec.factor(), n, &opts, rng)?;
    Ok(finish(class, outcome, steps, 1, started))
}

/// Draws `n` samples split across `opts.chains` chains, chain `i` seeded
/// with `seed + i`. Chains run on separate threads; rows are concatenated in
/// chain order, so the output depends only on the arguments.
pub fn sample_constrained_seeded(
    spec: &ProblemSpec,
    n: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<SamplingOutcome> {
    let started = Instant::now();
    if opts.chains == 0 {
        return Err(Error::InvalidArgument("chains must be at least 1".into()));
    }
    let class = classify(spec)?;
    if opts.chains == 1 || !matches!(class.plan, Plan::Direct(_) | Plan::Chain { .. }) {
        let mut rng = RandomSource::seed_from_u64(seed);
        let (outcome, steps) = execute(&class.plan, spec.factor(), n, opts, &mut rng)?;
        return Ok(finish(class, outcome, steps, 1, started));
    }

    let quotas: Vec<usize> = (0..opts.chains)
        .map(|i| n / opts.chains + usize::from(i < n % opts.chains))
        .collect();
    let results: Vec<Result<(Outcome, usize)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = quotas
            .iter()
            .enumerate()
            .map(|(i, &quota)| {
                let plan = &class.plan;
                let factor = spec.factor();
                scope.spawn(move || {
                    let mut rng = RandomSource::seed_from_u64(seed.wrapping_add(i as u64));
                    execute(plan, factor, quota, opts, &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling thread panicked"))
            .collect()
    });
    let mut all = Samples::with_capacity(spec.dim(), n);
    let mut steps = 0;
    for r in results {
        let (outcome, s) = r?;
        steps += s;
        if let Outcome::Samples(chunk) = outcome {
            all.extend(&chunk);
        }
    }
    Ok(finish(class, Outcome::Samples(all), steps, opts.chains, started))
}

fn finish(class: Classification, outcome: Outcome, steps: usize, chains: usize, started: Instant) -> SamplingOutcome {
    SamplingOutcome {
        outcome,
        report: RunReport {
            recipe: class.recipe,
            equality: class.equality,
            feasibility: class.feasibility,
            chain_length: steps,
            chains,
            elapsed: started.elapsed(),
        },
    }
}

fn execute<R: Rng>(
    plan: &Plan,
    factor: &CovarianceFactor,
    n: usize,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<(Outcome, usize)> {
    match plan {
        Plan::Impossible(reason) => Ok((Outcome::Impossible(reason.clone()), 0)),
        Plan::PointMass(x) => Ok((Outcome::PointMassAt(x.clone()), 0)),
        Plan::Direct(t) => {
            let dim = t.dim();
            let mut out = Samples::with_capacity(dim, n);
            let mut w = Vector::zeros(dim);
            let mut y = Vector::zeros(dim);
            let mut x = Vector::zeros(dim);
            for _ in 0..n {
                factor.sample_into(rng, &mut w, &mut y);
                x.copy_from(&t.g);
                x.gemv(1.0, &t.f, &y, 1.0);
                out.push(x.as_slice());
            }
            Ok((Outcome::Samples(out), 0))
        }
        Plan::Chain { transform, start, .. } => {
            let latent = run_chain_with(transform, factor, start.clone(), n, opts.burn_in, opts.thin, &mut *rng)?;
            let mut out = Samples::with_capacity(transform.dim(), n);
            for i in 0..latent.len() {
                out.push(transform.map_latent(&latent.row_vector(i)).as_slice());
            }
            Ok((Outcome::Samples(out), opts.burn_in + n * opts.thin))
        }
    }
}
