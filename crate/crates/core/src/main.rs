use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use nonlocal_ap::cli::{run, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match emit(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(cli: &Cli) -> anyhow::Result<u8> {
    let outcome = run(&cli.command);
    let (out, svg) = match &cli.command {
        Command::Eigen(c) | Command::Check(c) => (c.out.as_ref(), None),
        Command::Solve(a) | Command::Threshold(a) => (a.common.out.as_ref(), None),
        Command::Diagram(a) => (a.solve.common.out.as_ref(), a.svg.as_ref()),
    };
    if let Some(text) = &outcome.output {
        match out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes()).context("writing standard output")?,
        }
    }
    if let (Some(path), Some(text)) = (svg, &outcome.svg) {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(msg) = &outcome.message {
        eprintln!("{msg}");
    }
    Ok(outcome.exit)
}
