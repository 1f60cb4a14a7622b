//! `selfsim`: solve, reduce, evolve and verify similarity profiles from problem files.

mod csvio;
mod error;
mod problem;
mod report;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use error::CliError;
use report::{Header, Report};

#[derive(Debug, Parser)]
#[command(name = "selfsim", version, about = "Similarity profiles of nonlinear diffusion systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (TOML). Repeat to run several problems.
    #[arg(long, global = true)]
    problem: Vec<PathBuf>,

    /// Output directory; one subdirectory per problem when several are given.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override a problem entry, as in `--override grid.n_points=4001`.
    #[arg(long = "override", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for running several problems.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Seed for any random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Scalar profile by shooting.
    ProfileScalar,
    /// Vector profile by continuation and Newton.
    ProfileVector,
    /// Equilibrium parametrization of a reaction network.
    Reduce {
        /// Also certify monotonicity of the reduced flux.
        #[arg(long)]
        check_monotonicity: bool,
    },
    /// Solve the reduced problem and lift it to concentrations.
    Lift,
    /// Relative-entropy decay of a perturbed profile.
    Evolve,
    /// Recompute the checks for an existing profile.
    Verify {
        /// Profile written by `profile-scalar` or `profile-vector`.
        #[arg(long)]
        profile: PathBuf,
    },
    /// Compare the solver with a closed-form profile.
    Oracle {
        /// `linear`, `linear(d)`, `degen_I`, `degen_II`, `degen_III` or `gl_phase`.
        #[arg(long)]
        example: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ProfileScalar => "profile-scalar",
            Command::ProfileVector => "profile-vector",
            Command::Reduce { .. } => "reduce",
            Command::Lift => "lift",
            Command::Evolve => "evolve",
            Command::Verify { .. } => "verify",
            Command::Oracle { .. } => "oracle",
        }
    }
}

fn dispatch(cli: &Cli, problem: Option<&Path>, out: &Path) -> Result<Report, CliError> {
    let parsed = problem.map(|p| problem::load(p, &cli.overrides)).transpose()?;
    let need = || parsed.as_ref().ok_or_else(|| CliError::Validation(vec!["--problem is required".into()]));
    match &cli.command {
        Command::ProfileScalar => run::profile_scalar(need()?, out),
        Command::ProfileVector => run::profile_vector(need()?, out),
        Command::Reduce { check_monotonicity } => run::reduce(need()?, *check_monotonicity, cli.seed),
        Command::Lift => run::lift(need()?, out),
        Command::Evolve => run::run_evolve(need()?, out),
        Command::Verify { profile } => run::verify(need()?, profile),
        Command::Oracle { example } => run::oracle(parsed.as_ref(), example.as_deref(), out),
    }
}

/// Runs one problem and writes `report.json`; returns the exit code.
fn execute(cli: &Cli, problem: Option<&Path>, out: &Path) -> i32 {
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("cannot create {}: {e}", out.display());
        return 2;
    }
    let outcome = dispatch(cli, problem, out);
    let label = problem.map(|p| p.display().to_string()).unwrap_or_default();
    let header = Header { command: cli.command.name(), problem: &label, seed: cli.seed };
    let (doc, code) = report::document(&header, &outcome);
    if let Err(e) = csvio::write_json(&out.join("report.json"), &doc) {
        eprintln!("cannot write report: {e}");
        return 2;
    }
    match &outcome {
        Err(e) => eprintln!("{label}: {e}"),
        Ok(r) => {
            for c in r.checks.iter().filter(|c| !c.pass) {
                eprintln!("{label}: check {} failed: {} vs bound {}", c.name, c.value, c.bound);
            }
        }
    }
    println!("{} {label}: {} (exit {code})", cli.command.name(), doc["status"].as_str().unwrap_or(""));
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.problem.len() {
        0 => execute(&cli, None, &cli.out),
        1 => execute(&cli, Some(&cli.problem[0]), &cli.out),
        _ => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("cannot start worker pool: {e}");
                    return ExitCode::from(2);
                }
            };
            let codes: Vec<i32> = pool.install(|| {
                cli.problem
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                        execute(&cli, Some(p), &cli.out.join(format!("{i:03}_{stem}")))
                    })
                    .collect()
            });
            codes.into_iter().max().unwrap_or(0)
        }
    };
    ExitCode::from(code as u8)
}
