use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use normgroup::{Caps, Execution};
use normgroup_cli::docs::SeedDoc;
use normgroup_cli::{render, run, Command, Failure, Options};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Norms on groups, conjugation moduli, free products and finite
/// approximations, driven by JSON documents.
#[derive(Parser, Debug)]
#[command(name = "normgroup", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Input document, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Output document, `-` for stdout.
    #[arg(long, default_value = "-")]
    output: String,
    /// Largest ball, group or table that may be materialized.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    cap_ball: Option<u64>,
    /// Largest number of matches or raw words enumerated.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    cap_match: Option<u64>,
    /// Seed document used in place of the input's `seed`.
    #[arg(long)]
    seed_doc: Option<PathBuf>,
    /// Include full intermediate tables in the output.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut s = String::new();
    let r = if path == "-" {
        std::io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| s = t)
    };
    r.map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))?;
    Ok(s)
}

fn write_output(path: &str, text: &str) -> Result<(), Failure> {
    let r = if path == "-" {
        std::io::stdout().write_all(text.as_bytes())
    } else {
        std::fs::write(path, text)
    };
    r.map_err(|e| Failure::Input(format!("cannot write {path}: {e}")))
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let mut caps = Caps::default();
    if let Some(c) = cli.cap_ball {
        caps.ball = c as usize;
    }
    if let Some(c) = cli.cap_match {
        caps.matches = c as usize;
    }
    let seed_doc = match &cli.seed_doc {
        Some(p) => {
            let text = read_input(&p.to_string_lossy())?;
            let doc: SeedDoc =
                serde_json::from_str(&text).map_err(|e| Failure::Input(format!("invalid seed document: {e}")))?;
            Some(doc)
        }
        None => None,
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let opts = Options { caps, trace: cli.trace, seed_doc, exec };
    let input = read_input(&cli.input)?;
    let outcome = run(cli.command, &input, &opts)?;
    let text = match cli.format {
        Format::Json => outcome.document,
        Format::Table => render::table(&outcome.document),
    };
    write_output(&cli.output, &text)?;
    Ok(outcome.certified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(f) => {
            eprint!("{}", f.document());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
