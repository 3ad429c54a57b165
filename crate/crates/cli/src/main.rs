mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command};

/// Exit status when the computation finished but an invariant monitor failed.
const MONITOR_FAILED: u8 = 3;

fn run(cli: &Cli) -> Result<commands::Output> {
    let g = &cli.global;
    rayon::ThreadPoolBuilder::new()
        .num_threads(g.threads)
        .build_global()
        .context("configuring the worker pool")?;
    match &cli.command {
        Command::Dist(a) => commands::dist(g, a),
        Command::Corr(a) => commands::corr(g, a),
        Command::Entropy(a) => commands::entropy(g, a),
        Command::Bell(a) => commands::bell(g, a),
        Command::Traj(a) => commands::traj(g, a),
        Command::Selftest(a) => commands::selftest(g, a),
    }
}

fn write_output(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        std::fs::write(path, text).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = write_output(&cli.global.output, &output.text) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    if output.monitors_ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: an invariant monitor failed; see the output for details");
        ExitCode::from(MONITOR_FAILED)
    }
}
