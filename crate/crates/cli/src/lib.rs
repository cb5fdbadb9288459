//! Config-driven experiment runner for `localent`.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod tasks;

use std::path::Path;

use config::parse_override;
use error::{CliError, Context};

pub fn load_config(path: &Path) -> Result<toml::Value, CliError> {
    let text = std::fs::read_to_string(path).context(|| format!("reading {}", path.display()))?;
    text.parse().map_err(|e: toml::de::Error| CliError::Config { field: path.display().to_string(), msg: e.message().to_string() })
}

pub fn preset_config(name: &str) -> Result<toml::Value, CliError> {
    let p = presets::find(name).ok_or_else(|| CliError::Config { field: "preset".into(), msg: format!("unknown preset `{name}`") })?;
    Ok(p.toml.parse().expect("presets are valid TOML"))
}

pub fn apply_overrides(doc: &mut toml::Value, overrides: &[String]) -> Result<(), CliError> {
    overrides.iter().try_for_each(|o| parse_override(doc, o))
}
