use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use probemul::harness::{self, SamplingMode, SweepSpec};
use probemul::io::{read_matrix_csv, write_matrix_csv};
use probemul::{approx_multiply, gen_matrix, ApproxConfig, Distribution, Error, GenSpec, ProbeSchedule, SolverChoice};

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "probemul", version, about = "Approximate matrix products through a regularized probe system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded test matrix as CSV.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "uniform-signed")]
        dist: Distribution,
        #[arg(long = "max-mag", default_value_t = 1.0)]
        max_mag: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate AB and write it as CSV.
    Multiply {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate AB, compare it with the exact product and write a JSON report.
    Evaluate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        report: PathBuf,
    },
    /// Evaluate generated matrices over a range of sizes.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value = "uniform-signed")]
        dist: Distribution,
        #[arg(long = "max-mag", default_value_t = 1.0)]
        max_mag: f64,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long = "baseline-s", value_delimiter = ',')]
        baseline_s: Vec<usize>,
        /// Sample baseline columns without replacement.
        #[arg(long)]
        baseline_distinct: bool,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Target Frobenius error.
    #[arg(long)]
    delta: f64,
    /// Regularization; defaults to 1/n^3.
    #[arg(long)]
    epsilon: Option<f64>,
    /// paper, const:V or random.
    #[arg(long, default_value = "paper")]
    probe: String,
    #[arg(long, default_value = "sd")]
    solver: SolverChoice,
    /// Seed for generated matrices and random probes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
}

impl SolveArgs {
    fn config(&self) -> Result<ApproxConfig, Error> {
        let epsilon = self.epsilon;
        let schedule = match self.probe.as_str() {
            "paper" => ProbeSchedule::Paper { epsilon },
            "random" => ProbeSchedule::RandomUnit {
                seed: self.seed,
                epsilon,
            },
            other => match other.strip_prefix("const:") {
                Some(value) => ProbeSchedule::Constant {
                    value: value.parse().map_err(|_| {
                        Error::InvalidInput(format!("`{value}` is not a probe value"))
                    })?,
                    epsilon,
                },
                None => {
                    return Err(Error::InvalidInput(format!(
                        "unknown probe `{other}` (expected paper, const:V or random)"
                    )))
                }
            },
        };
        let mut config = ApproxConfig::new(self.delta)
            .with_schedule(schedule)
            .with_solver(self.solver);
        config.max_iters = self.max_iters;
        config.rho()?;
        Ok(config)
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_INPUT
    }
}

fn run(cli: Cli) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    match cli.command {
        Command::Gen {
            n,
            dist,
            max_mag,
            seed,
            out,
        } => {
            let a = gen_matrix(&GenSpec {
                n,
                distribution: dist,
                max_mag,
                seed,
            })
            .map_err(fail)?;
            write_matrix_csv(&a, &out).map_err(fail)?;
        }
        Command::Multiply { a, b, solve, out } => {
            let config = solve.config().map_err(fail)?;
            let a = read_matrix_csv(&a).map_err(fail)?;
            let b = read_matrix_csv(&b).map_err(fail)?;
            let result = approx_multiply(&a, &b, &config).map_err(fail)?;
            if !result.converged() {
                return Err((
                    EXIT_SOLVER,
                    format!(
                        "solver stopped after {} iterations without reaching rho = {:e}",
                        result.iterations(),
                        result.rho
                    ),
                ));
            }
            write_matrix_csv(&result.c_prime, &out).map_err(fail)?;
            eprintln!(
                "[multiply] n = {}, iterations = {}, build {:.3e}s, solve {:.3e}s",
                a.rows(),
                result.iterations(),
                result.wall_time_build.as_secs_f64(),
                result.wall_time_solve.as_secs_f64()
            );
        }
        Command::Evaluate { a, b, solve, report } => {
            let config = solve.config().map_err(fail)?;
            let a = read_matrix_csv(&a).map_err(fail)?;
            let b = read_matrix_csv(&b).map_err(fail)?;
            let r = harness::evaluate(&a, &b, &config).map_err(fail)?;
            let json = harness::single_report_json(&r).map_err(fail)?;
            std::fs::write(&report, json).map_err(|source| {
                fail(Error::Io {
                    path: report.clone(),
                    source,
                })
            })?;
            println!(
                "n = {}  fro_abs = {:e}  fro_rel = {:e}  delta = {:e}  delta_met = {}  iterations = {}",
                r.n, r.fro_abs, r.fro_rel, r.delta_target, r.delta_met, r.iterations
            );
            if !r.converged {
                return Err((EXIT_SOLVER, "solver did not reach its residual target".into()));
            }
        }
        Command::Sweep {
            sizes,
            trials,
            dist,
            max_mag,
            solve,
            baseline_s,
            baseline_distinct,
            report,
            csv,
        } => {
            let spec = SweepSpec {
                sizes,
                trials,
                distribution: dist,
                max_mag,
                seed: solve.seed,
                config: solve.config().map_err(fail)?,
                baselines: baseline_s,
                baseline_mode: if baseline_distinct {
                    SamplingMode::WithoutReplacement
                } else {
                    SamplingMode::WithReplacement
                },
            };
            let out = harness::sweep(&spec).map_err(fail)?;
            out.write_json(&report).map_err(fail)?;
            out.write_csv(&csv).map_err(fail)?;
            for row in &out.scaling {
                let ratio = row
                    .ratio_to_previous
                    .map_or_else(|| "-".to_string(), |r| format!("{r:.2}"));
                println!(
                    "n = {:>5}  median time/iter = {:.3e}s  median iterations = {}  ratio = {}",
                    row.n, row.median_time_per_iter_s, row.median_iterations, ratio
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
