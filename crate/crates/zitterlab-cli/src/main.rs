//! Command-line front end for the trembling-motion scenario runner.
//!
//! Subcommands: `run` executes a scenario config and writes the CSV/JSON
//! artifact pair, `validate` checks a config without running it, and
//! `schema` prints the config schema. Exit codes: 0 when every gate
//! passes, 1 when a gate fails (the summary is still written), 2 on
//! invalid configs or I/O failures.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "zitterlab", version, about = "Trembling-motion scenario runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a scenario config and write the CSV/JSON artifacts.
    Run {
        /// Path to the JSON scenario config.
        config: PathBuf,
    },
    /// Parse and validate a config without running it.
    Validate {
        /// Path to the JSON scenario config.
        config: PathBuf,
    },
    /// Print the JSON schema of the config format.
    Schema,
}

/// Caps the global thread pool when ZITTERLAB_THREADS is set.
fn init_thread_pool() {
    if let Ok(raw) = std::env::var("ZITTERLAB_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, String> {
    ScenarioConfig::load(path).map_err(|e| e.to_string())
}

fn cmd_run(path: &PathBuf) -> ExitCode {
    let cfg = match load(path) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let out = match scenarios::run(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for g in &out.gates {
        println!(
            "gate {}: {} (measured {:.3e}, tolerance {:.3e})",
            g.name,
            if g.pass { "PASS" } else { "FAIL" },
            g.measured,
            g.tolerance
        );
    }
    match report::write_artifacts(&cfg, &out) {
        Ok(true) => {
            println!("all gates passed");
            ExitCode::SUCCESS
        }
        Ok(false) => {
            println!("gate failure; summary written to {}", cfg.outputs.json_path);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: cannot write artifacts: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_validate(path: &PathBuf) -> ExitCode {
    match load(path) {
        Ok(cfg) => {
            println!("config ok: scenario {}", cfg.scenario.name());
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Run { config } => cmd_run(config),
        Cmd::Validate { config } => cmd_validate(config),
        Cmd::Schema => {
            println!("{}", config::SCHEMA);
            ExitCode::SUCCESS
        }
    }
}
