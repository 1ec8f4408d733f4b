//! `nbstein`: negative binomial Stein factors, immigration–birth–death
//! simulation and parasite-burden bounds from the command line.
//!
//! Exit codes: 0 success, 1 a certification failed, 2 usage error,
//! 3 accuracy or I/O error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use output::{write_output, Format};

#[derive(Debug, Parser)]
#[command(name = "nbstein", version, about = "Negative binomial approximation in the Wasserstein metric")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format; tables default to csv, single reports to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for Monte Carlo commands. Results do not depend on it.
    #[arg(long, global = true, value_parser = parse_workers)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The constant r0 solving Γ(r − 1/2)/Γ(r) = 3√(2e)/8.
    R0 {
        /// Bisection bracket width.
        #[arg(long, default_value_t = 1e-13, value_parser = parse_positive)]
        tol: f64,
    },
    /// Bounds on the Stein factors of NB(r, p): G1 ≤ 1/(1−p) and
    /// G2 ≤ min{2/(1−p), (1+p)/(1−p)², √(r0/(rp(1−p)³))}.
    Bounds(NbArgs),
    /// Solve the Stein equation p(r+i)g(i+1) − i g(i) = f(i) − E f(Z) for
    /// the extremal test function f(j) = −|j − i|.
    SteinSolve {
        #[command(flatten)]
        nb: NbArgs,
        /// Centre of the test function.
        #[arg(long, default_value_t = 1)]
        i: u64,
        /// Truncation N; defaults to well past the bulk of NB(r, p).
        #[arg(long)]
        n: Option<u64>,
    },
    /// Measure G1 and G2 over a grid of (r, p) and check them against
    /// their bounds.
    SteinCertify {
        /// `default` or a JSON file {"r": [...], "p": [...]}.
        #[arg(long, default_value = "default")]
        grid: String,
    },
    /// Simulate an immigration–birth–death process with unit death rate.
    SimulateIbd {
        /// Immigration rate.
        #[arg(long, default_value_t = 1.0, value_parser = parse_nonneg)]
        a: f64,
        /// Per-capita birth rate.
        #[arg(long, value_parser = parse_nonneg)]
        b: f64,
        /// Observation time.
        #[arg(long, value_parser = parse_positive)]
        t: f64,
        /// Initial population.
        #[arg(long, default_value_t = 0)]
        z0: u64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Check simulated single-ancestor and immigration populations against
    /// the modified geometric and negative binomial laws, and the coupling
    /// Z_i = Z_{i−1} + Y_1.
    VerifyLemmas {
        #[command(flatten)]
        mc: McArgs,
    },
    /// Check ∫Λ_t/√(1−Λ_t) dt = 2/(1−p) and ∫Λ_t²/√(1−Λ_t) dt = 4/(3(1−p)).
    VerifyIdentities {
        /// A single p; defaults to 0.1, 0.5 and 0.9.
        #[arg(long, value_parser = parse_prob)]
        p: Option<f64>,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-11, value_parser = parse_positive)]
        tol: f64,
    },
    /// Exposure functionals and the Wasserstein bound between a host's
    /// parasite burden and NB(R_a*, θ_T).
    ParasiteBound {
        #[command(flatten)]
        sc: ScenarioArgs,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
        tol: f64,
    },
    /// Sample the parasite burden exactly and compare its distance to
    /// NB(R_a*, θ_T) with the bound. Without --scenario, runs the built-in
    /// battery.
    ParasiteValidate {
        #[command(flatten)]
        sc: OptionalScenarioArgs,
        /// Samples per scenario (default 2e5, or the battery's setting).
        #[arg(long, value_parser = parse_samples)]
        samples: Option<u64>,
        /// Seed (default 1, or the battery's setting).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Bound for the total burden of several hosts sharing b and T;
    /// requires n·R̄ > r0.
    AggregateBound {
        /// Host scenario file; repeat for several hosts.
        #[arg(long, required = true, value_name = "PATH")]
        scenario: Vec<PathBuf>,
        /// Copies of each scenario.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        hosts: u64,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
        tol: f64,
    },
    /// Check Σ_j (j−1)∫|f_j'| against its closed form and the constants
    /// 34/3, 37/3 and 16.
    AppendixCheck {
        /// A single θ_T; defaults to 0.1, 0.2, …, 0.9.
        #[arg(long, value_parser = parse_prob)]
        theta: Option<f64>,
        /// Tolerance on the summed left-hand side.
        #[arg(long, default_value_t = 1e-8, value_parser = parse_positive)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
struct NbArgs {
    /// Shape r > 0.
    #[arg(long, value_parser = parse_positive)]
    r: f64,
    /// Success probability 0 < p < 1.
    #[arg(long, value_parser = parse_prob)]
    p: f64,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Number of replicates.
    #[arg(long, default_value_t = 100_000, value_parser = parse_samples)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Override the scenario's parasite birth rate.
    #[arg(long, value_parser = parse_prob)]
    b: Option<f64>,
    /// Override the scenario's host age.
    #[arg(long = "T", value_parser = parse_positive)]
    host_age: Option<f64>,
}

#[derive(Debug, Args)]
struct OptionalScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Override the scenario's parasite birth rate.
    #[arg(long, value_parser = parse_prob, requires = "scenario")]
    b: Option<f64>,
    /// Override the scenario's host age.
    #[arg(long = "T", value_parser = parse_positive, requires = "scenario")]
    host_age: Option<f64>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("{s} is not finite"));
    }
    Ok(x)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 { Ok(x) } else { Err(format!("{x} must be > 0")) }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x >= 0.0 { Ok(x) } else { Err(format!("{x} must be >= 0")) }
}

fn parse_prob(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 && x < 1.0 { Ok(x) } else { Err(format!("{x} must lie in (0, 1)")) }
}

fn parse_samples(s: &str) -> Result<u64, String> {
    let x: f64 = parse_f64(s)?;
    if x >= 1.0 && x.fract() == 0.0 && x <= 1e12 {
        Ok(x as u64)
    } else {
        Err(format!("{s} must be a whole number between 1 and 1e12"))
    }
}

fn parse_workers(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("{s} must be a whole number >= 1")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] nbstein::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("I/O error on {}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use nbstein::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Domain(_) | E::Input(_) | E::Precondition(_) | E::Precision(_)) => 2,
            CliError::Core(_) | CliError::Io(_) | CliError::File { .. } => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let run = || commands::run(&cli.command);
    let result = match cli.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(CliError::Usage(format!("cannot start {w} workers: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok(outcome) => {
            let format = cli.format.unwrap_or(outcome.default_format());
            if let Err(source) = write_output(&outcome.report.render(format), cli.out.as_deref()) {
                let e = match &cli.out {
                    Some(path) => CliError::File { path: path.clone(), source },
                    None => CliError::Io(source),
                };
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("certification failed: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
