use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::config::{set_key, ExperimentConfig, TaskKind};
use crate::error::{CliError, Context};
use crate::output::{progress_path, render, summary_path, write_atomic, Progress, Row};
use crate::tasks::{prepare, run_task};

#[derive(Debug)]
pub struct RunReport {
    pub path: PathBuf,
    pub rows: usize,
    pub config_hash: String,
    /// Sweep points taken from an earlier interrupted run.
    pub resumed: usize,
}

struct PointResult {
    rows: Vec<Row>,
    wall_time: f64,
    resumed: bool,
}

fn task_id(kind: TaskKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_string)).expect("task kinds serialize as strings")
}

/// Config of one sweep point: the axis set to `value`, the inner task promoted.
fn point_config(doc: &toml::Value, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig, CliError> {
    let sweep = cfg.sweep.as_ref().expect("sweep task");
    let mut d = doc.clone();
    set_key(&mut d, &sweep.axis, toml::Value::Float(value))?;
    set_key(&mut d, "task.kind", toml::Value::String(task_id(sweep.task)))?;
    if let Some(t) = d.as_table_mut() {
        t.remove("sweep");
    }
    ExperimentConfig::from_value(d).map_err(|e| match e {
        CliError::Config { field, msg } => CliError::Config { field, msg: format!("{msg} (at {} = {value})", sweep.axis) },
        other => other,
    })
}

fn run_sweep(doc: &toml::Value, cfg: &ExperimentConfig, hash: &str, path: &Path) -> Result<Vec<PointResult>, CliError> {
    let grid = cfg.sweep.as_ref().expect("sweep task").grid();
    // every point is validated before anything is computed
    let points: Vec<ExperimentConfig> = grid.iter().map(|&v| point_config(doc, cfg, v)).collect::<Result<_, _>>()?;
    let (log, done) = Progress::open(&progress_path(path), hash)?;
    let log = Mutex::new(log);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.workers)
        .build()
        .map_err(|e| CliError::Config { field: "output.workers".into(), msg: e.to_string() })?;
    pool.install(|| {
        points
            .par_iter()
            .zip(grid.par_iter())
            .enumerate()
            .map(|(k, (pc, &v))| {
                if let Some((rows, wall_time)) = done.get(&k) {
                    return Ok(PointResult { rows: rows.clone(), wall_time: *wall_time, resumed: true });
                }
                let t0 = Instant::now();
                let prep = prepare(pc)?;
                let mut rows = run_task(pc, &prep)?;
                for r in &mut rows {
                    r.param.get_or_insert(v);
                }
                let wall_time = t0.elapsed().as_secs_f64();
                log.lock().expect("progress lock").record(k, &rows, wall_time)?;
                Ok(PointResult { rows, wall_time, resumed: false })
            })
            .collect()
    })
}

/// Run a config document and write `<path>`, `<path>.summary.json`.
pub fn run(doc: toml::Value, default_name: &str, out: Option<PathBuf>) -> Result<RunReport, CliError> {
    let cfg = ExperimentConfig::from_value(doc.clone())?;
    let hash = cfg.hash();
    let path = out.or_else(|| cfg.output.path.clone()).unwrap_or_else(|| PathBuf::from(format!("{default_name}.csv")));
    let t0 = Instant::now();
    let points = if cfg.task.kind == TaskKind::Sweep {
        run_sweep(&doc, &cfg, &hash, &path)?
    } else {
        let prep = prepare(&cfg)?;
        vec![PointResult { rows: run_task(&cfg, &prep)?, wall_time: t0.elapsed().as_secs_f64(), resumed: false }]
    };
    let rows: Vec<Row> = points.iter().flat_map(|p| p.rows.iter().cloned()).collect();
    write_atomic(&path, &render(&hash, &rows))?;

    let resumed = points.iter().filter(|p| p.resumed).count();
    let summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "config": cfg,
        "output": path.display().to_string(),
        "rows": rows.len(),
        "wall_time": t0.elapsed().as_secs_f64(),
        "points": points.iter().enumerate().map(|(k, p)| json!({
            "index": k,
            "wall_time": p.wall_time,
            "resumed": p.resumed,
        })).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_atomic(&summary_path(&path), &text)?;
    let progress = progress_path(&path);
    if progress.exists() {
        std::fs::remove_file(&progress).context(|| format!("removing {}", progress.display()))?;
    }
    Ok(RunReport { path, rows: rows.len(), config_hash: hash, resumed })
}
