use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cocv_core::batch::{map, Exec};
use cocv_core::vernacular::{check_script, CheckConfig, Report, Severity};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cocv", version, about = "Check proof scripts, synthesizing the proofs of their remarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one or more scripts independently.
    Check(CheckArgs),
}

#[derive(clap::Args)]
struct CheckArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Print the synthesizer's search trace on stderr.
    #[arg(long)]
    trace: bool,
    /// Print each proof term after its type.
    #[arg(long)]
    print_proofs: bool,
    /// Step budget for each synthesis.
    #[arg(long, default_value_t = cocv_kernel::DEFAULT_FUEL, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
    /// Solutions kept per matching problem.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_solutions: u64,
    /// One JSON record per proved constant on stdout.
    #[arg(long)]
    machine_output: bool,
    /// Check files one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Serialize)]
struct Record<'a> {
    file: &'a str,
    name: &'a str,
    #[serde(rename = "type")]
    ty: String,
    proof: String,
    line: usize,
    col: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Ok = 0,
    Failed = 1,
    Usage = 2,
    Internal = 3,
}

struct FileResult {
    stdout: String,
    stderr: String,
    status: Status,
}

fn render(file: &str, report: &Report, args: &CheckArgs) -> FileResult {
    let mut stdout = String::new();
    let mut stderr = String::new();
    for line in &report.trace {
        stderr.push_str(&format!("{file}: trace: {line}\n"));
    }
    for c in &report.constants {
        if args.machine_output {
            let rec = Record {
                file,
                name: &c.name,
                ty: c.ty.to_string(),
                proof: c.proof.to_string(),
                line: c.pos.line,
                col: c.pos.col,
            };
            stdout.push_str(&serde_json::to_string(&rec).expect("records serialize"));
            stdout.push('\n');
        } else {
            stdout.push_str(&format!("Proved {} : {}\n", c.name, c.ty));
            if args.print_proofs {
                stdout.push_str(&format!("  := {}\n", c.proof));
            }
        }
    }
    let status = match &report.error {
        None => Status::Ok,
        Some(e) => {
            stderr.push_str(&format!("{file}:{}:{}: {}: {}\n", e.pos.line, e.pos.col, e.severity(), e.error));
            match e.severity() {
                Severity::Error => Status::Failed,
                Severity::Internal => Status::Internal,
            }
        }
    };
    FileResult { stdout, stderr, status }
}

fn check_file(path: &PathBuf, args: &CheckArgs, config: &CheckConfig) -> FileResult {
    let file = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(source) => render(&file, &check_script(&source, config), args),
        Err(e) => FileResult { stdout: String::new(), stderr: format!("{file}: error: cannot read file: {e}\n"), status: Status::Usage },
    }
}

fn check(args: &CheckArgs) -> Status {
    let config = CheckConfig { fuel: args.fuel, max_solutions: args.max_solutions as usize, trace: args.trace };
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    let results = map(exec, &args.files, |p| check_file(p, args, &config));
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    let mut status = Status::Ok;
    for r in results {
        let _ = out.write_all(r.stdout.as_bytes());
        let _ = err.write_all(r.stderr.as_bytes());
        status = status.max(r.status);
    }
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Check(args) => check(args),
    };
    ExitCode::from(status as u8)
}
