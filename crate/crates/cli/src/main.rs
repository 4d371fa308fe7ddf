mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use args::{Cli, Command};
use commands::{digest, Failure, Outcome};

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    args: Vec<String>,
    input_digest: String,
    outputs: Value,
    wall_time_s: f64,
    version: &'static str,
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Generate(_) => "generate",
        Command::Check(_) => "check",
        Command::Solve(_) => "solve",
        Command::Rank(_) => "rank",
        Command::Integrate(_) => "integrate",
        Command::Sweep(_) => "sweep",
        Command::Field(_) => "field",
        Command::Mesh(_) => "mesh",
        Command::Limits(_) => "limits",
    }
}

// a closed pipe downstream is not our failure
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn emit_error(kind: &str, message: &str) {
    let obj = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{obj}");
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    emit_error("usage", e.to_string().trim());
                    ExitCode::from(2)
                }
            };
        }
    };
    let start = Instant::now();
    let args: Vec<String> = argv.iter().skip(1).cloned().collect();
    let argv_digest = digest(args.join("\u{1f}").as_bytes());
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a, argv_digest),
        Command::Check(a) => commands::check(a),
        Command::Solve(a) => commands::solve(a),
        Command::Rank(a) => commands::rank(a),
        Command::Integrate(a) => commands::integrate(a),
        Command::Sweep(a) => commands::sweep(a, argv_digest),
        Command::Field(a) => commands::field(a),
        Command::Mesh(a) => commands::mesh(a),
        Command::Limits(a) => commands::limits(a),
    };
    match result {
        Ok(Outcome { raw: Some(text), .. }) => {
            emit(&text);
            ExitCode::SUCCESS
        }
        Ok(out) => {
            let report = RunReport {
                command: name(&cli.command),
                args,
                input_digest: out.input_digest,
                outputs: out.outputs,
                wall_time_s: start.elapsed().as_secs_f64(),
                version: env!("CARGO_PKG_VERSION"),
            };
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
            match out.failure {
                Some(e) => {
                    emit_error(e.kind(), &e.to_string());
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(Failure::Domain(e)) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            emit_error("usage", &m);
            ExitCode::from(2)
        }
        Err(Failure::Io { path, message }) => {
            emit_error("io", &format!("{}: {message}", path.display()));
            ExitCode::from(2)
        }
    }
}
