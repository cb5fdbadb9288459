//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [model]
//! family = "ising"          # ising | xxz | heisenberg | aklt | named | mps | state_file
//! n_sites = 14
//! boundary = "periodic"     # open | periodic
//! lambda = 0.8
//!
//! [task]
//! kind = "le_exact"         # le_exact | le_mc | bounds | fluctuations | string_order | thermal | sweep
//! n_min = 1
//! n_max = 5
//! strategy = "optimize"
//!
//! [output]
//! path = "ising.csv"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use localent::le::Measure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ising,
    Xxz,
    Heisenberg,
    Aklt,
    Named,
    Mps,
    StateFile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundChoice {
    /// Deterministic pure member of the ground block.
    Canonical,
    /// Equal mixture over a degenerate ground block.
    Mixture,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    /// Family sites, caps excluded. For `mps` this is the bulk length.
    #[serde(default)]
    pub n_sites: usize,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryKind,
    #[serde(default)]
    pub end_spins: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `ghz`, `cluster` or `product` for `named`; `aklt`, `counterexample` or `ghz` for `mps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    /// JSON file for `mps` or `state_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default = "default_ground")]
    pub ground: GroundChoice,
    /// Bond dimension when a dense state is turned into an MPS for Monte Carlo.
    #[serde(default = "default_max_bond")]
    pub max_bond: usize,
}

fn default_boundary() -> BoundaryKind {
    BoundaryKind::Periodic
}
fn default_ground() -> GroundChoice {
    GroundChoice::Canonical
}
fn default_max_bond() -> usize {
    16
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    LeExact,
    LeMc,
    Bounds,
    Fluctuations,
    StringOrder,
    Thermal,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Optimize,
    Standard,
    SigmaX,
    SigmaY,
    UBasis,
    /// U-basis strictly between the pair, standard elsewhere.
    UBetween,
    File,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    /// Fixed pair; otherwise the distance scan below is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[usize; 2]>,
    /// Use the two end sites of the chain as the pair.
    #[serde(default)]
    pub ends: bool,
    #[serde(default = "one")]
    pub n_min: usize,
    #[serde(default = "one")]
    pub n_max: usize,
    /// First site of a scanned pair `(origin, origin + n)`.
    #[serde(default)]
    pub origin: usize,
    /// Place scanned pairs symmetrically about the chain centre.
    #[serde(default)]
    pub centered: bool,
    #[serde(default = "default_measure")]
    pub measure: String,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy_file: Option<PathBuf>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Optimize one basis per site instead of a uniform basis.
    #[serde(default)]
    pub per_site: bool,
    /// Add rows with the diagonal connected correlations (qubit pairs).
    #[serde(default)]
    pub correlations: bool,
    /// Add Monte Carlo rows next to exact ones.
    #[serde(default)]
    pub with_mc: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub temperatures: Vec<f64>,
}

fn one() -> usize {
    1
}
fn default_measure() -> String {
    "concurrence".into()
}
fn default_strategy() -> StrategyKind {
    StrategyKind::Optimize
}
fn default_restarts() -> usize {
    20
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub sweeps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    pub chains: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { sweeps: 20_000, burn_in: None, chains: 1, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted key of the swept value, e.g. `model.lambda`.
    pub axis: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Task run at every grid point.
    pub task: TaskKind,
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        if !self.values.is_empty() {
            return self.values.clone();
        }
        match (self.start, self.stop, self.step) {
            (Some(a), Some(b), Some(s)) if s > 0.0 && b >= a => {
                let count = ((b - a) / s + 1e-9).floor() as usize + 1;
                // round to the step's decimals so grid values print cleanly
                (0..count).map(|k| ((a + s * k as f64) * 1e9).round() / 1e9).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Worker threads for sweeps; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), msg: msg.into() }
}

/// Set a dotted key in a TOML table, parsing `raw` as a TOML value when possible.
pub fn set_key(doc: &mut toml::Value, key: &str, value: toml::Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(cfg_err(key, "empty key segment"));
    }
    let mut cur = doc;
    for p in &parts[..parts.len() - 1] {
        let table = cur.as_table_mut().ok_or_else(|| cfg_err(key, format!("`{p}` is not a table")))?;
        cur = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = cur.as_table_mut().ok_or_else(|| cfg_err(key, "parent is not a table"))?;
    let last = parts[parts.len() - 1];
    // keep integers integral when a float grid value is written over them
    let value = match (table.get(last), value) {
        (Some(toml::Value::Integer(_)), toml::Value::Float(f)) if f.fract() == 0.0 => toml::Value::Integer(f as i64),
        (_, v) => v,
    };
    table.insert(last.to_string(), value);
    Ok(())
}

pub fn parse_override(doc: &mut toml::Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| cfg_err(spec, "override must look like key.path=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    set_key(doc, key, value)
}

/// Dotted key of the entry whose value starts at byte `pos`.
fn field_at(text: &str, pos: usize) -> String {
    let before = &text[..pos.min(text.len())];
    let line = before.rsplit('\n').next().unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim();
    let table = before
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')))
        .map(|t| t.trim_matches(['[', ']']).to_string());
    match table {
        Some(t) if !key.is_empty() => format!("{t}.{key}"),
        Some(t) => t,
        None => key.to_string(),
    }
}

impl ExperimentConfig {
    pub fn from_value(doc: toml::Value) -> Result<Self, CliError> {
        // round-trip through text so type errors carry a span to name the field
        let text = toml::to_string(&doc).map_err(|e| cfg_err("config", e.to_string()))?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e: toml::de::Error| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .or_else(|| e.span().map(|sp| field_at(&text, sp.start)))
                .unwrap_or_else(|| "config".into());
            cfg_err(&field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn measure(&self) -> Result<Measure, CliError> {
        self.task.measure.parse().map_err(|_| cfg_err("task.measure", format!("unknown measure `{}`", self.task.measure)))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        let t = &self.task;
        let need = |field: &str, v: Option<f64>| v.ok_or_else(|| cfg_err(field, "required for this family"));
        match m.family {
            Family::Ising => {
                need("model.lambda", m.lambda)?;
            }
            Family::Xxz => {
                need("model.delta", m.delta)?;
            }
            Family::Heisenberg => {
                need("model.beta", m.beta)?;
            }
            Family::Named | Family::Mps => {
                if m.state.is_none() && m.file.is_none() {
                    return Err(cfg_err("model.state", "name a state or give model.file"));
                }
            }
            Family::StateFile => {
                if m.file.is_none() {
                    return Err(cfg_err("model.file", "required for state_file"));
                }
            }
            Family::Aklt => {}
        }
        if m.family != Family::StateFile && m.n_sites < 2 {
            return Err(cfg_err("model.n_sites", "need at least 2 sites"));
        }
        if m.end_spins && !matches!(m.family, Family::Heisenberg | Family::Aklt) {
            return Err(cfg_err("model.end_spins", "caps only attach to spin-1 chains"));
        }
        for (field, v) in [("model.lambda", m.lambda), ("model.delta", m.delta), ("model.h", m.h), ("model.beta", m.beta)] {
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(cfg_err(field, "must be finite"));
            }
        }
        if m.max_bond == 0 {
            return Err(cfg_err("model.max_bond", "must be positive"));
        }
        let measure = self.measure()?;
        if t.n_min == 0 || t.n_max < t.n_min {
            return Err(cfg_err("task.n_min", "need 1 <= n_min <= n_max"));
        }
        if t.restarts == 0 {
            return Err(cfg_err("task.restarts", "must be positive"));
        }
        if t.strategy == StrategyKind::File && t.strategy_file.is_none() {
            return Err(cfg_err("task.strategy_file", "required when strategy = \"file\""));
        }
        if let Some([i, j]) = t.pair {
            if i == j {
                return Err(cfg_err("task.pair", "sites must differ"));
            }
        }
        if self.mc.sweeps == 0 || self.mc.chains == 0 {
            return Err(cfg_err("mc.sweeps", "sweeps and chains must be positive"));
        }
        let kind = self.effective_kind();
        let mixed = kind == TaskKind::Thermal || m.ground == GroundChoice::Mixture;
        if mixed && measure == Measure::Entropy {
            return Err(cfg_err(
                "task.measure",
                localent::Error::MeasureMismatch { measure: "entropy".into(), member: "mixed".into() }.to_string(),
            ));
        }
        if kind == TaskKind::Thermal {
            if t.temperatures.is_empty() {
                return Err(cfg_err("task.temperatures", "thermal task needs a temperature grid"));
            }
            if t.temperatures.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(cfg_err("task.temperatures", "temperatures must be positive"));
            }
        }
        if kind == TaskKind::LeMc && m.family == Family::StateFile {
            return Err(cfg_err("task.kind", "Monte Carlo needs a model or MPS"));
        }
        match (t.kind, &self.sweep) {
            (TaskKind::Sweep, None) => return Err(cfg_err("sweep", "sweep task needs a [sweep] table")),
            (TaskKind::Sweep, Some(s)) => {
                if s.task == TaskKind::Sweep {
                    return Err(cfg_err("sweep.task", "sweeps do not nest"));
                }
                if s.grid().is_empty() {
                    return Err(cfg_err("sweep.values", "empty grid"));
                }
                if !s.axis.contains('.') {
                    return Err(cfg_err("sweep.axis", "use a dotted key such as model.lambda"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Task run per point: the sweep's inner task, or the task itself.
    pub fn effective_kind(&self) -> TaskKind {
        match (&self.task.kind, &self.sweep) {
            (TaskKind::Sweep, Some(s)) => s.task,
            (k, _) => *k,
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
