//! CSV rows, atomic writes, the per-point progress log and the summary sidecar.
//!
//! Columns: `param, i, j, n, method, value, fluctuation, std_error,
//! lower_bound, upper_bound, strategy`. Floats carry 12 significant digits;
//! missing values are empty. The first line is
//! `# localent <version> config_hash=<sha256>`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context};
use localent::le::LeEstimate;

pub const COLUMNS: &str = "param,i,j,n,method,value,fluctuation,std_error,lower_bound,upper_bound,strategy";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub param: Option<f64>,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub n: Option<usize>,
    pub method: String,
    pub value: f64,
    pub fluctuation: Option<f64>,
    pub std_error: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub strategy: String,
}

impl Row {
    pub fn value(method: &str, n: Option<usize>, i: Option<usize>, j: Option<usize>, value: f64, strategy: &str) -> Self {
        Self {
            param: None,
            i,
            j,
            n,
            method: method.into(),
            value,
            fluctuation: None,
            std_error: None,
            lower_bound: None,
            upper_bound: None,
            strategy: strategy.into(),
        }
    }

    pub fn estimate(method: &str, n: usize, i: usize, j: usize, est: &LeEstimate) -> Self {
        let mut r = Self::value(method, Some(n), Some(i), Some(j), est.mean, est.strategy.label());
        r.fluctuation = Some(est.fluctuation);
        r.std_error = Some(est.std_error);
        r
    }

    pub fn to_csv(&self) -> String {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.11e}")).unwrap_or_default();
        let u = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            f(self.param),
            u(self.i),
            u(self.j),
            u(self.n),
            self.method,
            f(Some(self.value)),
            f(self.fluctuation),
            f(self.std_error),
            f(self.lower_bound),
            f(self.upper_bound),
            self.strategy.replace(',', ";")
        )
    }
}

pub fn header(hash: &str) -> String {
    format!("# localent {} config_hash={hash}\n{COLUMNS}\n", env!("CARGO_PKG_VERSION"))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn progress_path(path: &Path) -> PathBuf {
    sibling(path, ".progress")
}

pub fn summary_path(path: &Path) -> PathBuf {
    sibling(path, ".summary.json")
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = sibling(path, ".tmp");
    let mut f = File::create(&tmp).context(|| format!("creating {}", tmp.display()))?;
    f.write_all(contents.as_bytes()).context(|| format!("writing {}", tmp.display()))?;
    f.sync_all().context(|| format!("syncing {}", tmp.display()))?;
    fs::rename(&tmp, path).context(|| format!("renaming {} into place", tmp.display()))
}

pub fn render(hash: &str, rows: &[Row]) -> String {
    let mut s = header(hash);
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProgressLine {
    Head { config_hash: String },
    Point { index: usize, rows: Vec<Row>, wall_time: f64 },
}

/// Append-only log of finished grid points, keyed to one config hash.
pub struct Progress {
    file: File,
}

impl Progress {
    /// Open the log, returning points already finished under the same hash.
    /// A log written for another config is discarded.
    pub fn open(path: &Path, hash: &str) -> Result<(Self, BTreeMap<usize, (Vec<Row>, f64)>), CliError> {
        let mut done = BTreeMap::new();
        let mut matches = false;
        if let Ok(f) = File::open(path) {
            for (k, line) in BufReader::new(f).lines().enumerate() {
                let line = line.context(|| format!("reading {}", path.display()))?;
                match serde_json::from_str::<ProgressLine>(&line) {
                    Ok(ProgressLine::Head { config_hash }) if k == 0 => matches = config_hash == hash,
                    Ok(ProgressLine::Point { index, rows, wall_time }) if matches => {
                        done.insert(index, (rows, wall_time));
                    }
                    // a torn last line from an interrupted run
                    _ => {}
                }
            }
        }
        let file = if matches {
            OpenOptions::new().append(true).open(path).context(|| format!("opening {}", path.display()))?
        } else {
            done.clear();
            let mut f = File::create(path).context(|| format!("creating {}", path.display()))?;
            let head = serde_json::to_string(&ProgressLine::Head { config_hash: hash.into() }).expect("serializes");
            writeln!(f, "{head}").context(|| format!("writing {}", path.display()))?;
            f
        };
        Ok((Self { file }, done))
    }

    pub fn record(&mut self, index: usize, rows: &[Row], wall_time: f64) -> Result<(), CliError> {
        let line = serde_json::to_string(&ProgressLine::Point { index, rows: rows.to_vec(), wall_time }).expect("serializes");
        writeln!(self.file, "{line}").context(|| "writing progress".into())?;
        self.file.flush().context(|| "flushing progress".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_format() {
        let mut r = Row::value("exact", Some(2), Some(0), Some(2), 0.123456789012345, "standard");
        r.fluctuation = Some(0.0);
        assert_eq!(r.to_csv(), ",0,2,2,exact,1.23456789012e-1,0.00000000000e0,,,,standard");
    }

    #[test]
    fn progress_resumes_only_same_hash() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.progress");
        let row = Row::value("exact", Some(1), Some(0), Some(1), 0.5, "s");
        {
            let (mut log, done) = Progress::open(&p, "aaa").unwrap();
            assert!(done.is_empty());
            log.record(3, &[row.clone()], 0.1).unwrap();
        }
        let (_, done) = Progress::open(&p, "aaa").unwrap();
        assert_eq!(done[&3].0, vec![row]);
        let (_, done) = Progress::open(&p, "bbb").unwrap();
        assert!(done.is_empty());
    }
}
