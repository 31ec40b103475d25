//! Argument parsing and command dispatch. Exit codes: 0 all pass, 1 any
//! failure or check error, 2 input error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use g2het::exec::{self, Mode};
use g2het::ring::{LinearSolution, Scalar};
use serde::Serialize;

use crate::checks::{run_checks, solve_pairing};
use crate::registry;
use crate::report::Report;
use crate::scenario::load;

#[derive(Debug, Parser)]
#[command(name = "g2het", version, about = "Exact checks for heterotic G2 systems")]
pub struct Cli {
    /// Add wall-clock times to every report line (reports stop being byte-stable).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Run checks and cases on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArg {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub report: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the checks of a scenario file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Run built-in reproduction cases.
    Reproduce {
        /// Case id (see `list-cases`).
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        case: Option<String>,
        /// Run every case.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        report: ReportArg,
    },
    /// List the reproduction cases with their anchors.
    ListCases,
    /// Solve for the gauge pairings marked "solve" in a scenario file.
    SolvePairing {
        file: PathBuf,
        #[command(flatten)]
        report: ReportArg,
    },
}

fn emit(r: &Report, f: Format) -> i32 {
    match f {
        Format::Text => print!("{}", r.to_text()),
        Format::Json => print!("{}", r.to_json()),
    }
    r.exit_code
}

#[derive(Serialize)]
struct PairingReport {
    file: String,
    torsion: String,
    unknowns: Vec<String>,
    status: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    values: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    null_space: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    assumed_nonzero: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    leftover: Option<String>,
}

fn render_all(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::render).collect()
}

fn solve_pairing_cmd(file: &Path, f: Format) -> i32 {
    let sc = match load(file) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let sol = match solve_pairing(&sc) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let mut rep = PairingReport {
        file: sc.source.clone(),
        torsion: sol.torsion.render(&sc.coframe),
        unknowns: sol.unknowns.clone(),
        status: "",
        values: vec![],
        null_space: vec![],
        assumed_nonzero: vec![],
        leftover: None,
    };
    let code = match &sol.solution {
        LinearSolution::Unique { values, assumed_nonzero } => {
            rep.status = "unique";
            rep.values = render_all(values);
            rep.assumed_nonzero = render_all(assumed_nonzero);
            0
        }
        LinearSolution::Underdetermined { particular, basis, assumed_nonzero, .. } => {
            rep.status = "underdetermined";
            rep.values = render_all(particular);
            rep.null_space = basis.iter().map(|b| render_all(b)).collect();
            rep.assumed_nonzero = render_all(assumed_nonzero);
            0
        }
        LinearSolution::NoSolution { residual } => {
            rep.status = "none";
            rep.leftover = Some(residual.render());
            1
        }
    };
    match f {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep).expect("serializes")),
        Format::Text => {
            println!("solve-pairing {}", rep.file);
            println!("torsion: {}", rep.torsion);
            println!("status: {}", rep.status);
            for (n, v) in rep.unknowns.iter().zip(&rep.values) {
                println!("  {n} = {v}");
            }
            for (k, b) in rep.null_space.iter().enumerate() {
                println!("  null vector {}: ({})", k + 1, b.join(", "));
            }
            if !rep.assumed_nonzero.is_empty() {
                println!("valid where nonzero: {}", rep.assumed_nonzero.join(", "));
            }
            if let Some(l) = &rep.leftover {
                println!("inconsistent row: {l} = 0");
            }
        }
    }
    code
}

pub fn run(cli: Cli) -> i32 {
    exec::set_mode(if cli.sequential { Mode::Sequential } else { Mode::Parallel });
    match &cli.command {
        Command::Check { file, report } => match load(file) {
            Ok(sc) => {
                let entries = run_checks(&sc, cli.timings);
                emit(&Report::new(format!("check {}", sc.source), entries), report.report)
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Reproduce { case, all, report } => {
            let list = if *all {
                registry::cases()
            } else {
                let id = case.as_deref().expect("clap requires --case or --all");
                match registry::find(id) {
                    Some(c) => vec![c],
                    None => {
                        eprintln!("error: unknown case `{id}`; see `g2het list-cases`");
                        return 2;
                    }
                }
            };
            let title = if *all { "reproduce --all".to_string() } else { format!("reproduce --case {}", list[0].id) };
            emit(&Report::new(title, registry::run_cases(list, cli.timings)), report.report)
        }
        Command::ListCases => {
            for c in registry::cases() {
                println!("{:<22} {}", c.id, c.anchor);
            }
            0
        }
        Command::SolvePairing { file, report } => solve_pairing_cmd(file, report.report),
    }
}
