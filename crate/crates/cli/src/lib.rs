//! Command-line front end: classification, coordinates, membership checks,
//! structured decompositions and round-trip batches.
//!
//! Reports go to stdout as JSON (JSON lines for `roundtrip`); failures go to
//! stderr as a single JSON object.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use realform::classifier;
use realform::decomp;
use realform::grouprep::{self, matrix_from_value, matrix_to_value, validate_membership, Target};
use realform::harness;
use realform::invariants::{self, Involution};
use realform::reducible;
use realform::{ComplexMatrix, Error, Family, GroupKind, RealFormTag, Tolerance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Environment variable holding the default relative tolerance.
pub const TOL_ENV: &str = "REALFORM_TOL";

const ABS_TOL: f64 = 1e-12;

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "realform", version, about = "Real forms of classical-group representations")]
struct Cli {
    /// Relative tolerance (overrides REALFORM_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a representation and print a conjugation certificate.
    Classify {
        rep: PathBuf,
        #[arg(long, value_enum)]
        involution: InvolutionArg,
        /// Accept semi-simple reducible GL/SL representations.
        #[arg(long)]
        reducible: bool,
    },
    /// Trace coordinates (and Q-values for even SO).
    Coords {
        rep: PathBuf,
        #[arg(long, default_value_t = invariants::DEFAULT_WORD_CAP)]
        max_word_len: usize,
    },
    /// Membership residuals of every generator in a real form.
    Check {
        rep: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Structured decomposition of a single matrix.
    Decompose {
        #[arg(value_enum)]
        op: DecomposeOp,
        matrix: PathBuf,
    },
    /// Seeded sample-scramble-classify trials, one JSON line each.
    Roundtrip {
        #[arg(long)]
        tag: String,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = harness::DEFAULT_BATCH_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = harness::DEFAULT_GENERATORS)]
        generators: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InvolutionArg {
    Phi1,
    Phi2,
}

impl From<InvolutionArg> for Involution {
    fn from(a: InvolutionArg) -> Self {
        match a {
            InvolutionArg::Phi1 => Involution::Phi1,
            InvolutionArg::Phi2 => Involution::Phi2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecomposeOp {
    Polar,
    Sympeig,
    Kpq,
    Antisymp,
    Antiorth,
    Hilbert90,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID_INPUT,
            kind: kind.into(),
            message: message.into(),
        }
    }

    fn to_json(&self) -> String {
        json!({"error": self.kind, "message": self.message, "exit_code": self.code}).to_string()
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_)
        | Error::Contract(_)
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::UnsupportedSize(_) => EXIT_INVALID_INPUT,
        Error::NotApplicable(_) | Error::SemiSimplicity(_) => EXIT_PRECONDITION,
        Error::Degenerate(_)
        | Error::Indeterminate { .. }
        | Error::Pairing(_)
        | Error::Conditioning(_)
        | Error::Numerical { .. } => EXIT_NUMERICAL,
    }
}

/// Runs the command line `argv` (including the program name) with the
/// tolerance default taken from `env_tol`.
pub fn run_with_env<I, T>(argv: I, env_tol: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                    stderr: String::new(),
                };
            }
            let f = Failure::input("usage", e.to_string());
            return Outcome {
                code: f.code,
                stdout: String::new(),
                stderr: f.to_json(),
            };
        }
    };
    match execute(cli, env_tol) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: f.to_json(),
        },
    }
}

/// Runs with the tolerance default read from `REALFORM_TOL`.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(TOL_ENV).ok();
    run_with_env(argv, env.as_deref())
}

fn tolerance(flag: Option<f64>, env_tol: Option<&str>) -> Result<Tolerance, Failure> {
    let rel = match (flag, env_tol) {
        (Some(x), _) => x,
        (None, Some(s)) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| Failure::input("parameter", format!("{TOL_ENV}=`{s}` is not a number")))?,
        (None, None) => return Ok(Tolerance::default()),
    };
    Ok(Tolerance::new(rel, ABS_TOL)?)
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input("io", format!("cannot read {}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn execute(cli: Cli, env_tol: Option<&str>) -> Result<String, Failure> {
    let tol = tolerance(cli.tol, env_tol)?;
    match cli.command {
        Command::Classify {
            rep,
            involution,
            reducible,
        } => {
            let rep = grouprep::load_representation(&read(&rep)?, &tol)?;
            let which = Involution::from(involution);
            let value = if reducible {
                reducible::classify_semisimple(&rep, which, &tol)?.to_value()
            } else {
                classifier::classify_irreducible(&rep, which, &tol)?.to_value()
            };
            Ok(pretty(&value))
        }
        Command::Coords { rep, max_word_len } => {
            let rep = grouprep::load_representation(&read(&rep)?, &tol)?;
            let words = invariants::word_list(rep.num_generators(), rep.dim(), max_word_len)?;
            Ok(pretty(&invariants::trace_coordinates(&rep, &words)?.to_value()))
        }
        Command::Check { rep, target } => {
            let rep = grouprep::load_representation(&read(&rep)?, &tol)?;
            let tag: RealFormTag = target.parse()?;
            let reports = rep
                .generators
                .iter()
                .map(|g| validate_membership(g, Target::Form(tag), &tol))
                .collect::<Result<Vec<_>, _>>()?;
            let passed = reports.iter().all(|r| r.passed());
            let max = reports.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
            Ok(pretty(&json!({
                "target": tag.to_string(),
                "passed": passed,
                "max_residual": max,
                "generators": reports,
            })))
        }
        Command::Decompose { op, matrix } => {
            let doc = parse_json(&read(&matrix)?)?;
            let m = matrix_document(&doc)?;
            Ok(pretty(&decompose(op, &m, &doc, &tol)?))
        }
        Command::Roundtrip {
            tag,
            trials,
            seed,
            jobs,
            generators,
        } => {
            let tag: RealFormTag = tag.parse()?;
            if jobs == 0 {
                return Err(Failure::input("parameter", "--jobs must be at least 1"));
            }
            if generators == 0 {
                return Err(Failure::input("parameter", "--generators must be at least 1"));
            }
            let trial = |i: u64| harness::roundtrip_trial(tag, generators, harness::trial_seed(seed, i), &tol);
            let reports: Vec<_> = if jobs == 1 {
                (0..trials).map(trial).collect()
            } else {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| Failure::input("parameter", e.to_string()))?;
                pool.install(|| (0..trials).into_par_iter().map(trial).collect())
            };
            let mut out = String::new();
            for r in reports {
                out.push_str(&r.to_json_line());
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn parse_json(bytes: &[u8]) -> Result<Value, Failure> {
    serde_json::from_slice(bytes).map_err(|e| {
        Failure::from(Error::Parse {
            pointer: String::new(),
            message: e.to_string(),
        })
    })
}

/// `{"n": N, "matrix": [[re, im], ...], "kind": "Sp"}`; `kind` is only
/// needed for the polar decomposition.
fn matrix_document(doc: &Value) -> Result<ComplexMatrix, Failure> {
    let n = doc.get("n").and_then(Value::as_u64).ok_or_else(|| {
        Failure::from(Error::Parse {
            pointer: "/n".into(),
            message: "expected a positive integer".into(),
        })
    })? as usize;
    let entries = doc.get("matrix").ok_or_else(|| {
        Failure::from(Error::Parse {
            pointer: "/matrix".into(),
            message: "missing matrix".into(),
        })
    })?;
    Ok(matrix_from_value(entries, n, "/matrix")?)
}

fn decompose(op: DecomposeOp, m: &ComplexMatrix, doc: &Value, tol: &Tolerance) -> Result<Value, Failure> {
    let value = match op {
        DecomposeOp::Polar => {
            let family: Family = doc
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| {
                    Failure::from(Error::Parse {
                        pointer: "/kind".into(),
                        message: "polar needs the group kind (GL, SL, O, SO, Sp)".into(),
                    })
                })?
                .parse()?;
            let kind = GroupKind::new(family, m.nrows())?;
            let pp = decomp::polar_in_group(m, kind, tol)?;
            json!({"op": "polar", "U": matrix_to_value(&pp.u), "H": matrix_to_value(&pp.h)})
        }
        DecomposeOp::Sympeig => {
            let se = decomp::symplectic_eig(m, tol)?;
            json!({
                "op": "sympeig",
                "V": matrix_to_value(&se.v),
                "D": matrix_to_value(&se.d()),
                "lambda": se.lambda,
            })
        }
        DecomposeOp::Kpq => {
            let (s, sig) = decomp::reduce_to_kpq(m, tol)?;
            json!({"op": "kpq", "S": matrix_to_value(&s), "signature": [sig.p, sig.q]})
        }
        DecomposeOp::Antisymp => {
            let s = decomp::antisymplectic_reduce(m, tol)?;
            json!({"op": "antisymp", "S": matrix_to_value(&s)})
        }
        DecomposeOp::Antiorth => {
            let mm = decomp::antiorthogonal_reduce(m, tol)?;
            json!({"op": "antiorth", "M": matrix_to_value(&mm)})
        }
        DecomposeOp::Hilbert90 => {
            let h = decomp::hilbert90(m, tol)?;
            json!({
                "op": "hilbert90",
                "Q": matrix_to_value(&h.q),
                "c": grouprep::complex_to_value(h.c),
                "condition": h.condition,
            })
        }
    };
    Ok(value)
}
