//! `linmvn`: sample a multivariate normal under linear equality and
//! inequality constraints from the command line.
//!
//! Exit codes: 0 success, 1 malformed input, 2 impossible problem,
//! 3 numerical failure, 4 comparison failed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use linmvn::feasibility::FeasibilityResult;
use linmvn::io::{parse_problem, write_csv, FormatError};
use linmvn::oracles::{conditional_direct_sample, rejection_sample};
use linmvn::orchestrator::{classify, sample_constrained_seeded, Outcome, Plan, SamplerOptions, SamplingOutcome};
use linmvn::stats::{compare_stats, sample_stats, sample_stats_iid, SampleStats};
use linmvn::transform::EqualityClass;
use linmvn::{fixtures, Error, ProblemSpec, RandomSource, Samples};
use rand::SeedableRng;

#[derive(Parser)]
#[command(name = "linmvn", version, about = "Linearly constrained multivariate normal sampler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples and write them as CSV.
    Sample {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        /// Independent chains, chain i seeded with seed + i.
        #[arg(long, default_value_t = 1)]
        chains: usize,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the problem without sampling.
    Check {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Compare the sampler's moments with an independent oracle.
    Compare {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        oracle: OracleKind,
        #[arg(long, default_value_t = 4.0)]
        sigma: f64,
        /// Oracle proposals; defaults to 10 * n.
        #[arg(long)]
        proposals: Option<u64>,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Write a bundled fixture set to disk.
    Fixtures {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    /// Plain accept-reject; inequality-only problems.
    Rejection,
    /// Exact draws on the equality plane, filtered by any inequalities.
    Conditional,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotSymmetric { .. }
            | Error::NotPsd { .. }
            | Error::DimensionMismatch(_)
            | Error::NonFinite(_)
            | Error::InvalidArgument(_) => 1,
            Error::SingularEqualityGram
            | Error::DegenerateRegion { .. }
            | Error::EmptyArcSet
            | Error::InfeasibleChainState { .. }
            | Error::CyclingGuardExceeded(_)
            | Error::DegenerateSamples => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Sample {
            problem,
            n,
            seed,
            burn_in,
            thin,
            chains,
            out,
        } => sample(&problem, n, seed, burn_in, thin, chains, out.as_deref()),
        Command::Check { problem } => check(&problem),
        Command::Compare {
            problem,
            n,
            seed,
            oracle,
            sigma,
            proposals,
            chains,
            json,
        } => compare(&problem, n, seed, oracle, sigma, proposals, chains, json),
        Command::Fixtures { name, out_dir } => write_fixtures(&name, &out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<ProblemSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| match e {
        FormatError::Problem(inner) => Failure::from(inner),
        other => Failure::input(format!("{}: {other}", path.display())),
    })
}

fn options(burn_in: usize, thin: usize, chains: usize) -> Result<SamplerOptions, Failure> {
    if thin == 0 || chains == 0 {
        return Err(Failure::input("--thin and --chains must be at least 1"));
    }
    Ok(SamplerOptions { burn_in, thin, chains })
}

fn impossible(reason: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: format!("problem is impossible: {reason}"),
    }
}

/// Rows for the outcome, or exit 2 when there are none.
fn rows(outcome: &SamplingOutcome, n: usize) -> Result<Samples, Failure> {
    match &outcome.outcome {
        Outcome::Impossible(reason) => Err(impossible(reason)),
        _ => Ok(outcome.to_rows(n).expect("samples or point mass")),
    }
}

fn method_stats(outcome: &SamplingOutcome, samples: &Samples) -> Result<SampleStats, Failure> {
    let stats = if outcome.report.recipe.is_iid() {
        sample_stats_iid(samples)?
    } else {
        sample_stats(samples)?
    };
    Ok(stats)
}

fn summary(outcome: &SamplingOutcome, samples: &Samples) -> String {
    let r = &outcome.report;
    let mut s = format!(
        "recipe: {}\nrows: {}\nchains: {}\nchain steps: {}\nelapsed: {:.3?}\n",
        r.recipe,
        samples.len(),
        r.chains,
        r.chain_length,
        r.elapsed
    );
    match &outcome.outcome {
        Outcome::PointMassAt(x) => {
            s.push_str(&format!("point mass at {:?}\n", x.as_slice()));
        }
        _ => match method_stats(outcome, samples) {
            Ok(st) => {
                s.push_str(&format!(
                    "{:<6} {:>14} {:>12} {:>14} {:>12}\n",
                    "coord", "mean", "mean se", "variance", "ess"
                ));
                for i in 0..st.dim() {
                    s.push_str(&format!(
                        "x{:<5} {:>14.6} {:>12.3e} {:>14.6} {:>12.0}\n",
                        i + 1,
                        st.mean[i],
                        st.mean_se[i],
                        st.covariance[(i, i)],
                        st.ess[i]
                    ));
                }
            }
            Err(f) => s.push_str(&format!("statistics unavailable: {}\n", f.message)),
        },
    }
    s
}

fn sample(
    problem: &Path,
    n: usize,
    seed: u64,
    burn_in: usize,
    thin: usize,
    chains: usize,
    out: Option<&Path>,
) -> CliResult {
    let spec = load(problem)?;
    let opts = options(burn_in, thin, chains)?;
    let outcome = sample_constrained_seeded(&spec, n, seed, &opts)?;
    let samples = rows(&outcome, n)?;
    let text = summary(&outcome, &samples);
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let mut w = io::BufWriter::new(file);
            write_csv(&samples, &mut w)?;
            w.flush()?;
            print!("{text}");
        }
        None => {
            let stdout = io::stdout();
            let mut w = io::BufWriter::new(stdout.lock());
            write_csv(&samples, &mut w)?;
            w.flush()?;
            eprint!("{text}");
        }
    }
    Ok(())
}

fn check(problem: &Path) -> CliResult {
    let spec = load(problem)?;
    let class = classify(&spec)?;
    println!("recipe: {}", class.recipe);
    match &class.equality {
        None => println!("equalities: none"),
        Some(EqualityClass::NoSolution) => println!("equalities: no solution"),
        Some(EqualityClass::Unique(x)) => println!("equalities: unique solution {:?}", x.as_slice()),
        Some(EqualityClass::Infinite) => println!("equalities: infinitely many solutions"),
    }
    if let Some(FeasibilityResult::FullDimensional {
        chebyshev_radius,
        start_radius,
        ..
    }) = &class.feasibility
    {
        println!("chebyshev radius (latent, capped at 1): {chebyshev_radius:e}");
        println!("start ball radius: {start_radius:e}");
    }
    match &class.plan {
        Plan::Impossible(reason) => {
            println!("classification: Impossible");
            return Err(impossible(reason));
        }
        Plan::PointMass(x) => println!("classification: PointMass at {:?}", x.as_slice()),
        Plan::Direct(_) => println!("classification: FullDimensional (direct draws)"),
        Plan::Chain { start, transform, .. } => {
            println!("classification: FullDimensional");
            println!("start: {:?}", transform.map_latent(start).as_slice());
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn compare(
    problem: &Path,
    n: usize,
    seed: u64,
    oracle: OracleKind,
    sigma: f64,
    proposals: Option<u64>,
    chains: usize,
    json: bool,
) -> CliResult {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Failure::input("--sigma must be a positive number"));
    }
    let spec = load(problem)?;
    let opts = options(0, 1, chains)?;
    let outcome = sample_constrained_seeded(&spec, n, seed, &opts)?;
    let samples = rows(&outcome, n)?;
    let method = method_stats(&outcome, &samples)?;

    // The oracle draws from its own ChaCha stream so it never shares
    // numbers with any chain.
    let mut rng = RandomSource::seed_from_u64(seed);
    rng.set_stream(1);
    let budget = proposals.unwrap_or(10 * n as u64);
    let report = match oracle {
        OracleKind::Rejection => rejection_sample(&spec, budget, &mut rng)?,
        OracleKind::Conditional => {
            let filter = (spec.num_inequalities() > 0).then(|| (spec.a(), spec.b()));
            conditional_direct_sample(&spec, budget, &mut rng, filter)?
        }
    };
    if report.accepted < 2 {
        return Err(Failure {
            code: 3,
            message: format!(
                "oracle accepted {} of {} proposals; raise --proposals",
                report.accepted, report.proposals
            ),
        });
    }
    let oracle_stats = sample_stats_iid(&report.samples)?;
    let comparison = compare_stats(&method, &oracle_stats, sigma)?;
    if json {
        println!("{}", comparison.to_json());
    } else {
        println!(
            "method: {} ({} rows); oracle: {} of {} proposals accepted",
            outcome.report.recipe,
            samples.len(),
            report.accepted,
            report.proposals
        );
        print!("{comparison}");
    }
    if comparison.all_pass() {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: format!("{} element(s) differ beyond {sigma} se", comparison.failures().count()),
        })
    }
}

fn write_fixtures(name: &str, out_dir: &Path) -> CliResult {
    if name != "pentagon" {
        return Err(Failure::input(format!(
            "unknown fixture set '{name}' (available: pentagon)"
        )));
    }
    fs::create_dir_all(out_dir)?;
    for (file, contents) in fixtures::PENTAGON_FILES {
        let path = out_dir.join(file);
        fs::write(&path, contents)?;
        println!("{}", path.display());
    }
    Ok(())
}
