//! Rejection-free sampling of a multivariate normal distribution subject to
//! linear equality and inequality constraints,
//!
//! ```text
//! x ~ N(mu, S)   subject to   A x + b >= 0,   C x + d = 0.
//! ```
//!
//! Equalities are eliminated by an affine map `x = F y + g` of a latent
//! `y ~ N(0, S)`, a phase-one linear program finds a starting point inside
//! the remaining inequalities `H y + k >= 0` (or proves there is none), and
//! an elliptical slice sampler with exact feasible arcs draws the chain.
//!
//! ```
//! use linmvn::{fixtures, orchestrator, RandomSource};
//! use rand::SeedableRng;
//!
//! let spec = fixtures::pentagon_combined();
//! let mut rng = RandomSource::seed_from_u64(7);
//! let out = orchestrator::sample_constrained(&spec, 100, &mut rng).unwrap();
//! let samples = out.samples().unwrap();
//! assert_eq!(samples.len(), 100);
//! assert!(samples.rows().all(|x| spec.equality_residual(x) <= 1e-8));
//! ```

pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod liness;
pub mod lp;
pub mod oracles;
pub mod orchestrator;
pub mod problem;
pub mod samples;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use problem::ProblemSpec;
pub use samples::Samples;

/// Seedable generator used for all reproducible runs.
pub type RandomSource = rand_chacha::ChaCha8Rng;
