//! `hz` command-line front end. Every subcommand prints one JSON document on
//! standard output. Exit codes: 0 success, 1 verification failure, 2 bad
//! input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hz_core::bundle::best_response;
use hz_core::examples::{closed_form_equilibrium, table1_instance};
use hz_core::fixp_map::{search, BrouwerMap, IterationConfig, SearchConfig};
use hz_core::model::{
    equilibrium_to_json, load_equilibrium, load_instance, load_prices, save_instance,
};
use hz_core::unit_solver::{solve_bivalued, solve_unit};
use hz_core::verify::verify_equilibrium;
use hz_core::{Error, MarketInstance, Rat, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

/// Verification tolerance used for points found by `fixpoint`.
const FIXPOINT_VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "hz", version, about = "Hylland-Zeckhauser equilibrium toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Unit,
    Bivalued,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact equilibrium of a 0/1 or two-valued instance.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Unit)]
        mode: Mode,
    },
    /// Check an equilibrium file against an instance.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eq: PathBuf,
        /// 0 checks exactly in rational arithmetic; anything else uses
        /// binary64 with this absolute tolerance.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Optimal bundle and dual certificate for one agent (0-based).
    BestResponse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        agent: usize,
        #[arg(long)]
        prices: PathBuf,
    },
    /// Damped fixed-point search on the Brouwer map.
    Fixpoint {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_steps: usize,
    },
    /// Built-in fixtures.
    Examples {
        #[command(subcommand)]
        which: ExampleCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// The 4 x 4 instance with irrational equilibrium prices, and one of
    /// its two closed-form candidate equilibria.
    Irrational {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => EXIT_FAILED,
            _ => EXIT_BAD_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad_input(message: String) -> Failure {
    Failure {
        code: EXIT_BAD_INPUT,
        message,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))
}

fn instance(path: &Path) -> Result<MarketInstance, Failure> {
    Ok(load_instance(&read(path)?)?)
}

/// Output document and exit code of one command.
pub fn execute(cmd: &Command) -> Result<(Value, i32), Failure> {
    match cmd {
        Command::Solve { input, mode } => {
            let inst = instance(input)?;
            let eq = match mode {
                Mode::Unit => solve_unit(&inst)?,
                Mode::Bivalued => solve_bivalued(&inst)?,
            };
            Ok((equilibrium_to_json(&eq), EXIT_OK))
        }
        Command::Verify { input, eq, tol } => {
            let inst = instance(input)?;
            let point = load_equilibrium(&read(eq)?)?;
            if tol.is_nan() || *tol < 0.0 {
                return Err(bad_input(format!(
                    "tolerance must be nonnegative, got {tol}"
                )));
            }
            let (report, ok) = if *tol == 0.0 {
                let r = verify_equilibrium(&inst, &point, &Rat::zero())?;
                (r.to_json(), r.verdict)
            } else {
                let r = verify_equilibrium(&inst, &point.to_real(), tol)?;
                (r.to_json(), r.verdict)
            };
            Ok((report, if ok { EXIT_OK } else { EXIT_FAILED }))
        }
        Command::BestResponse {
            input,
            agent,
            prices,
        } => {
            let inst = instance(input)?;
            let p = load_prices(&read(prices)?)?;
            if *agent >= inst.n() {
                return Err(bad_input(format!(
                    "agent {agent} out of range for n = {}",
                    inst.n()
                )));
            }
            let br = best_response(inst.row(*agent), p.as_slice())?;
            let c = &br.certificate;
            Ok((
                json!({
                    "agent": agent,
                    "bundle": br.bundle.iter().map(Scalar::to_json).collect::<Vec<_>>(),
                    "support": br.support,
                    "value": c.optimal_value.to_json(),
                    "alpha": c.alpha.to_json(),
                    "mu": c.mu.to_json(),
                    "type": c.bundle_type.to_string(),
                }),
                EXIT_OK,
            ))
        }
        Command::Fixpoint {
            input,
            gamma,
            tol,
            restarts,
            seed,
            max_steps,
        } => {
            let inst = instance(input)?;
            let map = BrouwerMap::<f64>::new(&inst);
            let cfg = SearchConfig {
                iteration: IterationConfig {
                    gamma: *gamma,
                    tol: *tol,
                    max_steps: *max_steps,
                },
                restarts: *restarts,
                seed: *seed,
            };
            let out = search(&map, vec![], &cfg)?;
            let best = out.best();
            let converged = best.residual < *tol;
            let mut doc = json!({
                "residual": best.residual,
                "converged": converged,
                "point": best.point.to_json(),
                "restarts": restarts,
                "seed": seed,
                "gamma": gamma,
            });
            let mut code = EXIT_OK;
            if converged {
                let report =
                    verify_equilibrium(&inst, &best.point.to_equilibrium()?, &FIXPOINT_VERIFY_TOL)?;
                if !report.verdict {
                    code = EXIT_FAILED;
                }
                doc["verification"] = report.to_json();
            }
            Ok((doc, code))
        }
        Command::Examples {
            which: ExampleCommand::Irrational { which },
        } => {
            let cf = closed_form_equilibrium(*which)?;
            let inst: Value = serde_json::from_str(&save_instance(&table1_instance()))
                .expect("instance JSON is valid");
            Ok((
                json!({
                    "which": which,
                    "y": cf.y,
                    "r": cf.r,
                    "instance": inst,
                    "equilibrium": equilibrium_to_json(&cf.point),
                }),
                EXIT_OK,
            ))
        }
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// output. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((doc, code)) => {
            let text =
                serde_json::to_string_pretty(&doc).expect("serializing a JSON value cannot fail");
            let _ = writeln!(out, "{text}");
            code
        }
        Err(f) => {
            log::debug!("command failed: {f:?}");
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
