use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use msca::chains::{uncross, SolutionDoc};
use msca::experiment::{rows_to_csv, run_experiment, ExperimentConfig, Suite};
use msca::instances::{gen_coverage, gen_facility_location, gen_lower_bound, CoverageParams, FacilityParams};
use msca::lp_relaxation::{solve_lp, MAX_LP_ELEMENTS};
use msca::pipeline::run_pipeline;
use msca::rounding::{round, RoundingOutcome};
use msca::verification::{brute_force_opt_with_budget, verify_lemma_suite, Artifacts, BruteResult, BRUTE_BUDGET};
use msca::{Error, Instance};
use serde_json::json;

#[derive(Parser)]
#[command(name = "msca", version, about = "Exact LP relaxation and k/2 rounding for monotone submodular cost allocation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Lowerbound,
    Coverage,
    Facility,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Gap,
    Random,
    K2,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Lower-bound family parameter.
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// Zero-cost padding elements for the lower-bound family.
        #[arg(long, default_value_t = 0)]
        pad: usize,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coverage universe size (default 2n).
        #[arg(long)]
        universe: Option<usize>,
        #[arg(long, default_value_t = 0.35)]
        density: f64,
        #[arg(long)]
        unit_weights: bool,
        /// Facility opening costs are drawn from [0, opening_max].
        #[arg(long, default_value_t = 10)]
        opening_max: u32,
        /// Facility per-element costs are drawn from [0, assignment_max].
        #[arg(long, default_value_t = 10)]
        assignment_max: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the LP relaxation and write its chain allocation.
    Solve {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Round a solution to a partition.
    Round {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive optimum over all k^n assignments.
    Brute {
        instance: PathBuf,
        #[arg(long, default_value_t = BRUTE_BUDGET)]
        budget: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the structural checks; computes any artifact not supplied.
    Verify {
        instance: PathBuf,
        solution: Option<PathBuf>,
        rounding: Option<PathBuf>,
        brute: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a batch of full pipelines and write one CSV row per instance.
    Experiment {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        #[arg(long)]
        csv: PathBuf,
    },
}

/// Exit codes.
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

enum Failure {
    Error(Error),
    Verification(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    Instance::from_json(&read(path)?)
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match output {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Gen {
            family,
            k,
            p,
            pad,
            n,
            seed,
            universe,
            density,
            unit_weights,
            opening_max,
            assignment_max,
            output,
        } => {
            let inst = match family {
                Family::Lowerbound => gen_lower_bound(k, p, pad)?,
                Family::Coverage => gen_coverage(&CoverageParams {
                    n,
                    k,
                    universe: universe.unwrap_or(2 * n),
                    density,
                    unit_weights,
                    seed,
                })?,
                Family::Facility => gen_facility_location(&FacilityParams {
                    n,
                    k,
                    opening: (0, opening_max),
                    assignment: (0, assignment_max),
                    seed,
                })?,
            };
            emit(&output, &inst.to_json()?)?;
        }
        Cmd::Solve { instance, output } => {
            let inst = load_instance(&instance)?;
            let lp = solve_lp(&inst)?;
            let chain = uncross(&inst, &lp.allocation)?;
            let objective = chain.objective(&inst)?;
            emit(&output, &chain.to_json(&objective, Some(lp.iterations))?)?;
        }
        Cmd::Round {
            instance,
            solution,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let sol = SolutionDoc::from_json(&read(&solution)?)?;
            let chain = uncross(&inst, &sol.allocation(inst.k)?)?;
            emit(&output, &round(&inst, &chain)?.to_json()?)?;
        }
        Cmd::Brute {
            instance,
            budget,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let b = brute_force_opt_with_budget(&inst, budget)?;
            emit(&output, &b.to_json(inst.k)?)?;
        }
        Cmd::Verify {
            instance,
            solution,
            rounding,
            brute,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let art = match solution {
                None => run_pipeline(&inst, Some(BRUTE_BUDGET))?.artifacts(),
                Some(sol) => {
                    let doc = SolutionDoc::from_json(&read(&sol)?)?;
                    let allocation = doc.allocation(inst.k)?;
                    let lp_optimum = if inst.n() <= MAX_LP_ELEMENTS {
                        Some(solve_lp(&inst)?.objective)
                    } else {
                        None
                    };
                    // An infeasible solution has no chain form; the report says why.
                    let chain = uncross(&inst, &allocation).ok();
                    let rounding = match rounding {
                        Some(p) => Some(RoundingOutcome::from_json(&read(&p)?, inst.n())?),
                        None => None,
                    };
                    let brute = match brute {
                        Some(p) => Some(BruteResult::from_json(&read(&p)?)?),
                        None => None,
                    };
                    Artifacts {
                        allocation,
                        claimed_objective: Some(doc.objective),
                        lp_optimum,
                        chain,
                        rounding,
                        brute,
                    }
                }
            };
            let report = verify_lemma_suite(&inst, &art);
            emit(&output, &report.to_json()?)?;
            if !report.all_pass() {
                return Err(Failure::Verification(
                    report
                        .failures()
                        .iter()
                        .map(|c| format!("{}: {}", c.name, c.details))
                        .collect(),
                ));
            }
        }
        Cmd::Experiment {
            suite,
            seed,
            trials,
            kmax,
            csv,
        } => {
            let suite = match suite {
                SuiteArg::Gap => Suite::Gap,
                SuiteArg::Random => Suite::Random,
                SuiteArg::K2 => Suite::K2,
            };
            let rows = run_experiment(&ExperimentConfig {
                suite,
                seed,
                trials,
                kmax,
            })?;
            fs::write(&csv, rows_to_csv(&rows)).map_err(Error::from)?;
            if let Some(bad) = rows.iter().find(|r| !r.report.all_pass()) {
                return Err(Failure::Verification(vec![format!(
                    "{}: lemma suite failed",
                    bad.instance_id
                )]));
            }
        }
    }
    Ok(())
}

fn fail(code: u8, kind: &str, message: serde_json::Value) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(EXIT_USAGE, "usage", json!(e.to_string().trim_end())),
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(failed)) => fail(EXIT_FAIL, "verification", json!(failed)),
        Err(Failure::Error(e)) => {
            let (code, kind) = match &e {
                Error::Capacity { .. } => (EXIT_CAPACITY, "capacity"),
                Error::Contract(_) => (EXIT_FAIL, "contract"),
                Error::Internal(_) => (EXIT_FAIL, "internal"),
                Error::Parse(_) | Error::Json(_) => (EXIT_USAGE, "parse"),
                Error::Invalid(_) => (EXIT_USAGE, "invalid"),
                Error::Io(_) => (EXIT_USAGE, "io"),
            };
            fail(code, kind, json!(e.to_string()))
        }
    }
}
