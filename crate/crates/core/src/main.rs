use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use modtrace_core::builtin;
use modtrace_core::error::Error;
use modtrace_core::frames::is_frame;
use modtrace_core::haagerup::{
    factorize_trace_class, haagerup_report, haagerup_upper, phi, verify_complete_isometry, SearchOptions,
};
use modtrace_core::traceclass::{trace_beta, trace_class_summary, trace_norm_module};
use modtrace_core::workspace::{tensor_to_json, Workspace};

/// Trace-class operators on Hilbert modules with finite spectrum.
///
/// Exit codes: 0 success, 1 invalid input, 2 mathematically undefined result,
/// 3 numerical non-convergence. MODTRACE_THREADS caps the worker threads.
#[derive(Parser)]
#[command(name = "modtrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a workspace and check every invariant.
    Validate { file: PathBuf },
    /// Check the frame identity for a stored frame.
    FrameCheck {
        file: PathBuf,
        #[arg(long)]
        frame: String,
    },
    /// Frame trace of a positive operator.
    Trace {
        file: PathBuf,
        #[arg(long)]
        op: String,
        /// A stored frame, or `standard` / `canonical`.
        #[arg(long)]
        frame: String,
    },
    /// Whether trace(|t|) is defined, and its norm.
    TraceClass {
        file: PathBuf,
        #[arg(long)]
        op: String,
    },
    /// Tensor representation of a trace-class operator attaining its trace norm.
    Factorize {
        file: PathBuf,
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "canonical")]
        frame: String,
    },
    /// Haagerup norm of a stored tensor and the bound of its representation.
    Haagerup {
        file: PathBuf,
        #[arg(long)]
        tensor: String,
    },
    /// Upper and lower bounds for the level-n norm of a matrix tensor.
    ///
    /// Without --matrix or --tensor a random instance over the first module is
    /// drawn from the seed.
    VerifyIsometry {
        file: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        seed: u64,
        /// Accepted gap relative to 1 + upper.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, conflicts_with = "tensor")]
        matrix: Option<String>,
        /// Placed in the top-left corner of an otherwise zero matrix tensor.
        #[arg(long)]
        tensor: Option<String>,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long)]
        probe_width: Option<usize>,
    },
    /// Run the built-in reproductions and print a PASS/FAIL table.
    PaperExamples,
}

enum Outcome {
    Done,
    Undefined,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } => 3,
        Error::NotTraceClass(_) => 2,
        _ => 1,
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MODTRACE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // ignore failure: the pool may already exist
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Undefined) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Validate { file } => {
            let ws = Workspace::load(&file)?;
            print_json(&ws.summary());
            Ok(Outcome::Done)
        }
        Command::FrameCheck { file, frame } => {
            let ws = Workspace::load(&file)?;
            let (module, members) = ws.frame_members(&frame)?;
            let check = is_frame(module, members)?;
            print_json(&json!({ "frame": frame, "is_frame": check.is_frame, "deviation": check.deviation }));
            if check.is_frame {
                Ok(Outcome::Done)
            } else {
                Err(Error::NotAFrame {
                    deviation: check.deviation,
                })
            }
        }
        Command::Trace { file, op, frame } => {
            let ws = Workspace::load(&file)?;
            let t = ws.operator(&op)?;
            let beta = ws.frame_for(&frame, t.domain())?;
            let verdict = trace_beta(t, &beta)?;
            print_json(&verdict.to_json());
            Ok(if verdict.is_defined() {
                Outcome::Done
            } else {
                Outcome::Undefined
            })
        }
        Command::TraceClass { file, op } => {
            let ws = Workspace::load(&file)?;
            let summary = trace_class_summary(ws.operator(&op)?)?;
            print_json(&serde_json::to_value(&summary)?);
            Ok(Outcome::Done)
        }
        Command::Factorize { file, op, frame } => {
            let ws = Workspace::load(&file)?;
            let t = ws.operator(&op)?;
            let beta = ws.frame_for(&frame, t.domain())?;
            let u = factorize_trace_class(t, &beta)?;
            let module = ws.module_name(t.domain()).unwrap_or("?");
            print_json(&json!({
                "tensor": tensor_to_json(module, &u),
                "representation_upper": haagerup_upper(&u),
                "trace_norm": trace_norm_module(t)?,
                "reconstruction_error": phi(&u)?.distance(t),
            }));
            Ok(Outcome::Done)
        }
        Command::Haagerup { file, tensor } => {
            let ws = Workspace::load(&file)?;
            let report = haagerup_report(ws.tensor(&tensor)?)?;
            print_json(&serde_json::to_value(&report)?);
            Ok(Outcome::Done)
        }
        Command::VerifyIsometry {
            file,
            level,
            seed,
            tol,
            matrix,
            tensor,
            restarts,
            probe_width,
        } => {
            let ws = Workspace::load(&file)?;
            let (instance, u) = ws.isometry_instance(level, seed, matrix.as_deref(), tensor.as_deref())?;
            let opts = SearchOptions {
                probe_width,
                restarts,
                seed,
                ..SearchOptions::default()
            };
            let report = verify_complete_isometry(&u, &opts, tol)?;
            let mut value = serde_json::to_value(&report)?;
            value["instance"] = json!(instance);
            print_json(&value);
            Ok(Outcome::Done)
        }
        Command::PaperExamples => {
            let outcomes = builtin::run_all();
            let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
            for o in &outcomes {
                let mark = if o.passed { "PASS" } else { "FAIL" };
                println!("{mark}  {:width$}  {}", o.name, o.detail);
            }
            if outcomes.iter().all(|o| o.passed) {
                Ok(Outcome::Done)
            } else {
                Err(Error::Workspace("some reproductions failed".into()))
            }
        }
    }
}
