//! `cmtk`: evaluate, check and build over finite continuous structures.
//!
//! Reports go to stdout as JSON, a one-line summary to stderr. Exit codes:
//! 0 when the report passes, 1 on failure (or an approximate report), 2 on
//! unreadable input, parse and sort errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmtk_core::report::{Report, Status};
use cmtk_core::Error;

#[derive(Parser)]
#[command(name = "cmtk", version, about = "Continuous model theory toolkit")]
struct Cli {
    /// Render numbers with this many decimal digits (marks the report
    /// approximate).
    #[arg(long, global = true, value_name = "K")]
    decimal: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula in a structure.
    Eval(EvalArgs),
    /// Run one of the structural checks.
    Check(CheckArgs),
    /// Build eq sorts from a spec and verify their axioms.
    Eq(EqArgs),
    /// Build a fragment of the category of definable sets.
    Defcat(DefcatArgs),
    /// Parse and pretty-print a formula or theory.
    Parse(ParseArgs),
}

#[derive(Args, Clone)]
pub struct Inputs {
    /// Signature or theory file.
    #[arg(long)]
    sig: PathBuf,
    /// Structure JSON; repeat for a suite.
    #[arg(long = "structure")]
    structures: Vec<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    formula: String,
    /// Values of free variables, `x=a,y=b`.
    #[arg(long, default_value = "")]
    assign: String,
    /// Satisfaction tolerance.
    #[arg(long, default_value = "0")]
    tol: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Metric,
    Modulus,
    Definable,
    Adjunction,
    A7,
    Category,
    Conservative,
    StableEmbedded,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    what: What,
    #[command(flatten)]
    inputs: Inputs,
    /// Formula (repeat for algebra seeds); a bare relation name stands for
    /// the relation applied to fresh variables.
    #[arg(long = "formula")]
    formulas: Vec<String>,
    /// Context binders, `x : S, y : T`.
    #[arg(long)]
    context: Option<String>,
    /// Projection target binders (adjunction).
    #[arg(long)]
    target: Option<String>,
    /// Seeds for the target algebra (adjunction).
    #[arg(long = "target-formula")]
    target_formulas: Vec<String>,
    /// Closure bound for generated algebras.
    #[arg(long, default_value_t = 50)]
    limit: usize,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    /// The quantified variable of A7, `x : S`.
    #[arg(long)]
    var: Option<String>,
    /// Category description (JSON).
    #[arg(long)]
    category: Option<PathBuf>,
    /// Eq spec (conservative).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Extra base-language sentences (conservative).
    #[arg(long = "sentence")]
    sentences: Vec<String>,
    /// Sublanguage signature (stable-embedded).
    #[arg(long)]
    sub: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    epsilon: String,
    #[arg(long, default_value = "")]
    x: String,
    #[arg(long, default_value = "")]
    y: String,
    #[arg(long, default_value = "")]
    z: String,
}

#[derive(Args)]
pub struct EqArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    spec: PathBuf,
    /// Directory for the expanded structures and axiom listings.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DefcatArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Category description (JSON); without it the canonical
    /// interpretation is built.
    #[arg(long)]
    category: Option<PathBuf>,
    /// Also emit the internal language and check the model/functor round
    /// trip.
    #[arg(long)]
    internal: bool,
}

#[derive(Args)]
pub struct ParseArgs {
    /// Signature (or theory) file the formula is read against.
    #[arg(long)]
    sig: Option<PathBuf>,
    #[arg(long)]
    formula: Option<String>,
    /// A theory file to parse instead of a formula.
    #[arg(long)]
    theory: Option<PathBuf>,
    /// Check that printing and reparsing is stable.
    #[arg(long)]
    roundtrip: bool,
}

/// Failures of the command itself, as opposed to failed checks.
pub enum Failure {
    /// Unreadable files, parse, sort and structure errors: exit 2.
    Input(String),
    /// A prerequisite check failed: reported with status fail.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Check(m) => Failure::Check(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = commands::Fmt { decimal: cli.decimal };
    let (name, result) = match &cli.command {
        Command::Eval(a) => ("eval", commands::eval(a, &fmt)),
        Command::Check(a) => ("check", commands::check(a, &fmt)),
        Command::Eq(a) => ("eq", commands::eq(a, &fmt)),
        Command::Defcat(a) => ("defcat", commands::defcat(a, &fmt)),
        Command::Parse(a) => ("parse", commands::parse(a)),
    };
    let (report, code) = match result {
        Ok(mut r) => {
            if fmt.decimal.is_some() && r.status == Status::Pass {
                r.status = Status::Approximate;
            }
            let code = if r.status == Status::Pass { 0 } else { 1 };
            (r.finish(), code)
        }
        Err(Failure::Check(m)) => {
            let mut r = Report::new(name);
            r.status = Status::Fail;
            r.set("error", m);
            (r, 1)
        }
        Err(Failure::Input(m)) => {
            let mut r = Report::new(name);
            r.status = Status::Error;
            r.set("error", m);
            (r, 2)
        }
    };
    println!("{}", report.to_json());
    eprintln!("{}", commands::summary(&report));
    ExitCode::from(code)
}
