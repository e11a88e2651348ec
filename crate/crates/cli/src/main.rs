//! `qcov`: command-line access to the covariance, CHSH and separability
//! tools.
//!
//! Exit codes: 0 success, 2 malformed input, 3 dimension or semantic
//! error, 4 internal numerical failure.

mod output;
mod parse;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcov::bellwitness::{chsh_maximize, chsh_value, classify, horodecki_bound, ChshResult};
use qcov::correlation::{covariance_with, Ordering};
use qcov::counterexamples::{
    position_convergence, position_cov_demo, spin_cov_demo, GaussianProductState, PositionReport,
    SpinProductState,
};
use qcov::lhv::{dice_exact, sample_coincidences, DiceSpec};
use qcov::report::sig15;
use qcov::state::{embed, realize, LocalObservable, Side};
use qcov::{random, selftest, Error};

use output::{render, Format};

/// Seed for sampling when neither `--seed` nor `QCOV_SEED` is given.
const DEFAULT_DICE_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "qcov",
    version,
    about = "Covariance, CHSH and separability of bipartite states"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Seed for randomized commands.
    #[arg(long, env = "QCOV_SEED", global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a state as separable, non-separable or entangled.
    Classify {
        /// State keyword (bell:phi+, werner:0.3, maxmixed:2x3) or JSON file.
        #[arg(long)]
        state: String,
    },
    /// Evaluate or maximize the CHSH functional of a two-qubit state.
    Chsh {
        #[arg(long)]
        state: String,
        /// Twelve comma-separated reals (a, a', b, b') or `optimal`.
        #[arg(long, default_value = "optimal")]
        settings: String,
        /// Also report the closed-form maximum.
        #[arg(long)]
        oracle: bool,
    },
    /// Conditional covariance of a left and a right observable.
    Cov {
        #[arg(long)]
        state: String,
        /// Left observable: x|y|z|i, a Bloch vector, diag:v1,v2,..., or a JSON matrix file.
        #[arg(long)]
        a: String,
        /// Right observable, same forms as --a.
        #[arg(long)]
        b: String,
    },
    /// The two-dice ensemble: exact moments or sampled coincidences.
    Dice {
        /// DiceSpec JSON file; defaults to the built-in two-dice ensemble.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Number of sampled trials.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Derived observables with nonzero covariance on separable states.
    Torre {
        #[arg(long, value_enum)]
        demo: Demo,
        /// Bloch vector of the first spin.
        #[arg(long, default_value = "0.7071067811865476,0,0.7071067811865476")]
        bloch: String,
        /// Bloch vector of the second spin.
        #[arg(long, default_value = "0.7071067811865476,0,0.7071067811865476")]
        bloch2: String,
        #[arg(long, default_value_t = 1.0)]
        v1: f64,
        #[arg(long, default_value_t = 0.25)]
        v2: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu2: f64,
        /// Grid points per coordinate.
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// Tabulate the position error for grids doubling from 8 up to --n.
        #[arg(long)]
        convergence: bool,
    },
    /// Run the seeded invariant suite.
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Demo {
    Spin,
    Position,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Semantic(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_semantic() {
            Failure::Semantic(e.to_string())
        } else if matches!(e, Error::Numeric(_)) {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Semantic(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Semantic(m) | Failure::Numeric(m) => m,
        }
    }
}

#[derive(Serialize)]
struct ChshOutput {
    #[serde(flatten)]
    result: ChshResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    horodecki_bound: Option<f64>,
}

#[derive(Serialize)]
struct SpinOutput {
    demo: &'static str,
    state: SpinProductState,
    #[serde(flatten)]
    report: qcov::counterexamples::SpinReport,
}

#[derive(Serialize)]
struct PositionOutput {
    demo: &'static str,
    state: GaussianProductState,
    #[serde(flatten)]
    report: PositionReport,
}

#[derive(Serialize)]
struct ConvergenceOutput {
    demo: &'static str,
    state: GaussianProductState,
    rows: Vec<ConvergenceRow>,
}

#[derive(Serialize)]
struct ConvergenceRow {
    n_points: usize,
    #[serde(serialize_with = "sig15")]
    identity_residual: f64,
    #[serde(serialize_with = "sig15")]
    analytic_error: f64,
}

fn run(cli: &Cli) -> Result<(String, bool), Failure> {
    let fmt = cli.format;
    let out = match &cli.command {
        Command::Classify { state } => {
            let spec = parse::state(state)?;
            render(&classify(&spec)?, fmt)
        }
        Command::Chsh {
            state,
            settings,
            oracle,
        } => {
            let rho = realize(&parse::state(state)?)?;
            let result = if settings == "optimal" {
                chsh_maximize(&rho)?
            } else {
                chsh_value(&rho, &parse::settings(settings)?)?
            };
            let horodecki_bound = if *oracle {
                Some(horodecki_bound(&rho)?)
            } else {
                None
            };
            render(
                &ChshOutput {
                    result,
                    horodecki_bound,
                },
                fmt,
            )
        }
        Command::Cov { state, a, b } => {
            let rho = realize(&parse::state(state)?)?;
            let split = rho.split();
            let a = embed(
                &LocalObservable::new(parse::observable(a)?, Side::Left)?,
                split,
            )?;
            let b = embed(
                &LocalObservable::new(parse::observable(b)?, Side::Right)?,
                split,
            )?;
            render(&covariance_with(&rho, &a, &b, Ordering::Commuting)?, fmt)
        }
        Command::Dice {
            spec,
            exact: _,
            samples,
        } => {
            let spec = match spec {
                Some(path) => DiceSpec::from_json(&parse::read(path)?)?,
                None => DiceSpec::two_dice(),
            };
            match samples {
                Some(n) => {
                    let seed = cli.seed.unwrap_or(DEFAULT_DICE_SEED);
                    render(&sample_coincidences(&spec, *n, seed)?, fmt)
                }
                None => render(&dice_exact(&spec), fmt),
            }
        }
        Command::Torre {
            demo,
            bloch,
            bloch2,
            v1,
            v2,
            mu1,
            mu2,
            n,
            convergence,
        } => match demo {
            Demo::Spin => {
                let state = SpinProductState::new(parse::bloch(bloch)?, parse::bloch(bloch2)?)?;
                render(
                    &SpinOutput {
                        demo: "spin",
                        state,
                        report: spin_cov_demo(&state)?,
                    },
                    fmt,
                )
            }
            Demo::Position => {
                let state = GaussianProductState::new(*mu1, *mu2, *v1, *v2, *n)?;
                if *convergence {
                    let rows = position_convergence(&state, 8, *n)
                        .into_iter()
                        .map(|r| ConvergenceRow {
                            n_points: r.n_points,
                            identity_residual: r.identity_residual,
                            analytic_error: r.analytic_error,
                        })
                        .collect();
                    render(
                        &ConvergenceOutput {
                            demo: "position",
                            state,
                            rows,
                        },
                        fmt,
                    )
                } else {
                    render(
                        &PositionOutput {
                            demo: "position",
                            state,
                            report: position_cov_demo(&state)?,
                        },
                        fmt,
                    )
                }
            }
        },
        Command::Selftest => {
            let report = selftest::run(cli.seed.unwrap_or(random::DEFAULT_SEED))?;
            let passed = report.passed;
            return Ok((render(&report, fmt), passed));
        }
    };
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, passed)) => {
            println!("{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("qcov: selftest failed");
                ExitCode::from(4)
            }
        }
        Err(f) => {
            eprintln!("qcov: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
