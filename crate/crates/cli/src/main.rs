//! `asep-sixvertex`: run one simulation or experiment and write its table.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{Options, Settings};

fn main() -> ExitCode {
    let settings = match Options::parse().resolve_file().and_then(Settings::from_options) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(s: &Settings) -> Result<(), String> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = s.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| format!("threads: {e}"))?;
    eprintln!("running {:?} with {} replicas, seed {}", s.command, s.replicas, s.seed);
    let artifact = pool.install(|| commands::run(s))?;
    let bytes = artifact.render(s.format)?;
    match &s.out {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| format!("out: cannot write {}: {e}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(&bytes).map_err(|e| format!("out: {e}"))?,
    }
    for line in artifact.summary() {
        eprintln!("{line}");
    }
    Ok(())
}
