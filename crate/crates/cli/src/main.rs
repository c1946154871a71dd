#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use fdw_core::forward::ObservationSet;

use crate::commands::Output;
use crate::config::Experiment;
use crate::error::{CliError, CliResult};

/// Experiments for fractional diffusion-wave equations: forward solves,
/// late-time expansions and recovery of initial data and sources.
#[derive(Parser)]
#[command(name = "fdw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Noise seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Noise standard deviation; overrides the config.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    One,
    Two,
}

#[derive(Subcommand)]
enum Command {
    /// Mittag-Leffler values, or the classical identity checks without β.
    MlEval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Comma separated arguments.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<f64>,
    },
    /// Sample the solution on ω, optionally with Caputo residuals.
    Forward {
        #[command(flatten)]
        common: Common,
    },
    /// Late-time expansion and its remainder slope.
    Expand {
        #[command(flatten)]
        common: Common,
    },
    /// Recover a, b and f from observations.
    Invert {
        #[command(flatten)]
        common: Common,
        /// Observation CSV (x,t,value); generated from the config if absent.
        #[arg(long)]
        observations: Option<PathBuf>,
    },
    /// Reconstruct two data sets and compare them under the source scaling.
    SimulInvert {
        #[command(flatten)]
        common: Common,
    },
    /// Scalar or single-point recovery of a, b and the moments of μ.
    OdeLab {
        #[command(flatten)]
        common: Common,
    },
    /// Classical non-uniqueness witness and its fractional contrast.
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        order: Option<Order>,
        /// λ of an order one witness.
        #[arg(long)]
        lambda: Option<f64>,
        /// r of an order two witness.
        #[arg(long)]
        r: Option<f64>,
        /// Source horizon.
        #[arg(long = "T")]
        horizon: Option<f64>,
        /// Fractional order used for the contrast.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Test α against the excluded set for a moment index.
    Admissible {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        ell: Option<usize>,
    },
}

/// Inserts `value` at a dotted `path` of `map`.
fn set(map: &mut Map<String, Value>, path: &str, value: Value) {
    match path.split_once('.') {
        None => {
            map.insert(path.to_string(), value);
        }
        Some((head, rest)) => {
            let child = map.entry(head).or_insert_with(|| Value::Object(Map::new()));
            if !child.is_object() {
                *child = Value::Object(Map::new());
            }
            if let Value::Object(m) = child {
                set(m, rest, value);
            }
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(dir: &Path, output: &Output) -> CliResult<()> {
    let err = |path: PathBuf| move |source| CliError::Write { path, source };
    fs::create_dir_all(dir).map_err(err(dir.to_path_buf()))?;
    for (name, body) in &output.files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(err(path.clone()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<String> {
    let mut overrides = Map::new();
    let mut observations = None;
    let common = match &cli.command {
        Command::MlEval {
            common,
            beta,
            gamma,
            z,
        } => {
            if let Some(b) = beta {
                set(&mut overrides, "ml.beta", json!(b));
            }
            if let Some(g) = gamma {
                set(&mut overrides, "ml.gamma", json!(g));
            }
            if !z.is_empty() {
                set(&mut overrides, "ml.z", json!(z));
            }
            common
        }
        Command::Witness {
            common,
            order,
            lambda,
            r,
            horizon,
            alpha,
        } => {
            if let Some(o) = order {
                let name = match o {
                    Order::One => "one",
                    Order::Two => "two",
                };
                set(&mut overrides, "witness.order", json!(name));
            }
            match (order, lambda, r) {
                (Some(Order::Two), Some(_), _) => {
                    return Err(CliError::invalid(
                        "lambda",
                        "an order two witness takes --r",
                    ))
                }
                (Some(Order::One), _, Some(_)) => {
                    return Err(CliError::invalid(
                        "r",
                        "an order one witness takes --lambda",
                    ))
                }
                _ => {}
            }
            if let Some(p) = lambda.or(*r) {
                set(&mut overrides, "witness.param", json!(p));
            }
            if let Some(t) = horizon {
                set(&mut overrides, "witness.horizon", json!(t));
            }
            if let Some(a) = alpha {
                set(&mut overrides, "witness.contrast_alpha", json!(a));
            }
            common
        }
        Command::Admissible { common, alpha, ell } => {
            if let Some(a) = alpha {
                set(&mut overrides, "alpha", json!(a));
            }
            if let Some(l) = ell {
                set(&mut overrides, "ell", json!(l));
            }
            common
        }
        Command::Invert {
            common,
            observations: path,
        } => {
            if let Some(p) = path {
                observations = Some(
                    ObservationSet::from_csv(&read(p)?)
                        .map_err(|e| CliError::field("observations", e))?,
                );
            }
            common
        }
        Command::Forward { common }
        | Command::Expand { common }
        | Command::SimulInvert { common }
        | Command::OdeLab { common } => common,
    };
    if let Some(s) = common.seed {
        set(&mut overrides, "seed", json!(s));
    }
    if let Some(n) = common.noise {
        set(&mut overrides, "noise", json!(n));
    }
    let text = common.config.as_deref().map(read).transpose()?;
    let (experiments, has_cases) = config::load(text.as_deref(), &overrides)?;

    let execute = |exp: &Experiment| -> CliResult<Output> {
        match &cli.command {
            Command::MlEval { .. } => commands::ml_eval(exp),
            Command::Forward { .. } => commands::forward(exp),
            Command::Expand { .. } => commands::expand(exp),
            Command::Invert { .. } => commands::invert(exp, observations.clone()),
            Command::SimulInvert { .. } => commands::simul_invert(exp),
            Command::OdeLab { .. } => commands::ode_lab(exp),
            Command::Witness { .. } => commands::witness(exp),
            Command::Admissible { .. } => commands::admissible(exp),
        }
    };

    if !has_cases {
        let output = execute(&experiments[0])?;
        write(&common.out, &output)?;
        let report = output
            .files
            .iter()
            .find(|(name, _)| *name == "report.txt")
            .map(|(_, body)| body.clone())
            .unwrap_or_default();
        return Ok(report);
    }
    let mut summary = String::new();
    for (i, exp) in experiments.iter().enumerate() {
        let index = i + 1;
        let output = execute(exp).map_err(|e| CliError::Case {
            index,
            source: Box::new(e),
        })?;
        write(&common.out.join(format!("case-{index}")), &output)?;
        let _ = writeln!(summary, "case {index}: {}", output.summary);
    }
    write(
        &common.out,
        &Output {
            files: vec![("report.txt", summary.clone())],
            summary: String::new(),
        },
    )?;
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("fdw: {}: {msg}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
