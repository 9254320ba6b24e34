use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlinc::experiments::{output_root, templates, write_outcome, ExperimentConfig, Registry, OUTPUT_ROOT_VAR};
use nlinc::Error;

/// Batch runner for semilinear inclusion experiments.
#[derive(Parser)]
#[command(name = "nlinc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its artifacts.
    Run {
        config: PathBuf,
        /// Overrides the output root (otherwise taken from the environment or `./results`).
        #[arg(long)]
        output_root: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// List the built-in templates.
    List,
    /// Print the config of a built-in template.
    Template { name: String },
}

fn status(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_config() { 2 } else { 1 })
}

fn load(path: &PathBuf, registry: &Registry) -> Result<ExperimentConfig, Error> {
    let cfg = ExperimentConfig::from_path(path)?;
    registry.validate(&cfg)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let registry = Registry::default();
    match cli.command {
        Command::Run { config, output_root: root } => {
            let cfg = match load(&config, &registry) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return status(&e);
                }
            };
            let outcome = match registry.run(&cfg) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {} failed: {e}", cfg.name);
                    return status(&e);
                }
            };
            let dir = cfg.run_dir(&root.unwrap_or_else(output_root));
            if let Err(e) = write_outcome(&outcome, &dir) {
                eprintln!("error: writing artifacts to {}: {e}", dir.display());
                return ExitCode::from(1);
            }
            print!("{}", outcome.report());
            println!("artifacts in {}", dir.display());
            if outcome.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Validate { config } => match load(&config, &registry) {
            Ok(cfg) => {
                println!("{}: valid `{}` config", cfg.name, cfg.kind);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                status(&e)
            }
        },
        Command::List => {
            println!("{:<28} {:<18} {:<10} summary", "template", "result", "criteria");
            for t in templates() {
                let criteria: Vec<String> = t.criteria.iter().map(u8::to_string).collect();
                println!("{:<28} {:<18} {:<10} {}", t.name, t.anchor, criteria.join(","), t.summary);
            }
            println!("\nexperiment kinds:");
            for k in registry.kinds() {
                println!("  {:<14} {}", k.kind(), k.describe());
            }
            println!("\noutput root: ${OUTPUT_ROOT_VAR} (default ./results)");
            ExitCode::SUCCESS
        }
        Command::Template { name } => match templates().iter().find(|t| t.name == name) {
            Some(t) => match serde_json::to_string_pretty(&t.config()) {
                Ok(s) => {
                    println!("{s}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            },
            None => {
                eprintln!("error: no template named `{name}`; see `nlinc list`");
                ExitCode::from(2)
            }
        },
    }
}
