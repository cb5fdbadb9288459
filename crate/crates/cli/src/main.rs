use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use localent_cli::error::CliError;
use localent_cli::{apply_overrides, load_config, preset_config, presets, run};

#[derive(Parser)]
#[command(name = "localent", version, about = "Localizable entanglement experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a TOML config file.
    Run {
        config: PathBuf,
        /// `key.path=value`, applied before validation.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output CSV, overriding `output.path`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    ListPresets,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (mut doc, name, overrides, out) = match cli.cmd {
        Cmd::ListPresets => {
            for p in presets::PRESETS {
                println!("{:<22} {}", p.name, p.about);
            }
            return Ok(());
        }
        Cmd::Run { config, overrides, out } => {
            let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
            (load_config(&config)?, stem, overrides, out)
        }
        Cmd::Preset { name, overrides, out } => (preset_config(&name)?, name, overrides, out),
    };
    apply_overrides(&mut doc, &overrides)?;
    let report = run::run(doc, &name, out)?;
    let resumed = if report.resumed > 0 { format!(", {} points resumed", report.resumed) } else { String::new() };
    println!("wrote {} rows to {} (config {}{resumed})", report.rows, report.path.display(), &report.config_hash[..12]);
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
