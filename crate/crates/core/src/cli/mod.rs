//! Command-line front end: flags, configuration merging, dispatch and exit
//! codes (0 all checks pass, 1 numerical failure, 2 configuration error).

mod commands;

use std::path::PathBuf;

use clap::Parser;

use isolab::config::{self, env_overrides, parse_text, validate, ExperimentConfig, RawConfig, COMMANDS};
use isolab::io::{to_json, FailureRecord, OutputDir};
use isolab::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "isolab", version, about = "Numerical experiments on asymptotically Schwarzschild initial data")]
pub struct Cli {
    /// Configuration file (`key = value` lines, `[section]` headers allowed).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV, JSON and plot-data files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Subcommand to run; overrides `command` from the configuration.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    pub subcommand: Option<String>,
    /// Only validate the configuration and print diagnostics.
    #[arg(long)]
    pub validate: bool,
}

fn config_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("configuration error: {msg}");
    EXIT_CONFIG
}

fn resolve(cli: &Cli, env: impl IntoIterator<Item = (String, String)>) -> Result<ExperimentConfig, String> {
    let mut raw = RawConfig::new();
    if let Some(p) = &cli.config {
        let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
        raw = parse_text(&text).map_err(|e| e.to_string())?;
    }
    raw.extend(env_overrides(env));
    if let Some(s) = &cli.subcommand {
        raw.insert("command".into(), s.clone());
    }
    if let Some(o) = &cli.out {
        raw.insert("output.dir".into(), o.display().to_string());
    }
    if let Some(t) = cli.threads {
        raw.insert("threads".into(), t.to_string());
    }
    ExperimentConfig::from_raw(&raw).map_err(|e| e.to_string())
}

pub fn run(cli: Cli, env: impl IntoIterator<Item = (String, String)>) -> i32 {
    let cfg = match resolve(&cli, env) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let diag = validate(&cfg);
    for w in &diag.warnings {
        eprintln!("warning: {w}");
    }
    if !diag.is_ok() {
        for e in &diag.errors {
            eprintln!("error: {e}");
        }
        return EXIT_CONFIG;
    }
    if cli.validate {
        println!("configuration is valid");
        print!("{}", config::to_text(&cfg));
        return EXIT_OK;
    }
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
            return config_error(format!("cannot configure {} threads: {e}", cfg.threads));
        }
    }
    let mut out = match OutputDir::create(&cfg.output_dir) {
        Ok(o) => o,
        Err(e) => return config_error(e),
    };
    if let Err(e) = out.write("config.resolved", &config::to_text(&cfg)) {
        return config_error(e);
    }
    match commands::run(&cfg, &mut out) {
        Ok(summary) => {
            for c in &summary.checks {
                println!("{} {} (value {:e}, tolerance {:e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
            }
            if let Err(e) = out.json("summary.json", &summary) {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
            println!("{}: {} ({})", summary.command, if summary.passed { "all checks pass" } else { "checks failed" }, out.root().display());
            if summary.passed {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            let code = if matches!(e, Error::InvalidParameter(_) | Error::Parse(_)) { EXIT_CONFIG } else { EXIT_NUMERICAL };
            let record = FailureRecord::from_error(&cfg.command, &e, code);
            eprintln!("{}: {e}", cfg.command);
            if let Ok(text) = to_json(&record) {
                let _ = out.write("failure.json", &text);
            }
            code
        }
    }
}
