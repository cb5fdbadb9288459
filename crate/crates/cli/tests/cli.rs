use std::fs;
use std::path::Path;
use std::process::Command;

use localent_cli::config::TaskKind;
use localent_cli::error::CliError;
use localent_cli::output::{header, progress_path, Progress, Row};
use localent_cli::{apply_overrides, preset_config, run::run};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_localent"))
}

fn preset(name: &str, overrides: &[&str]) -> toml::Value {
    let mut doc = preset_config(name).unwrap();
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    apply_overrides(&mut doc, &o).unwrap();
    doc
}

fn small_cusp() -> toml::Value {
    preset("xxx-cusp", &["model.n_sites=6", "sweep.start=-1.2", "sweep.stop=-0.8", "sweep.step=0.2"])
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let doc = preset("ising-fig2-left", &["model.n_sites=8", "task.n_max=3", "mc.sweeps=300"]);
    let ra = run(doc.clone(), "x", Some(a.clone())).unwrap();
    let rb = run(doc, "x", Some(b.clone())).unwrap();
    assert_eq!(ra.config_hash, rb.config_hash);
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    assert!(ta.starts_with(&header(&ra.config_hash)));
    // exact, mc, qxx, qyy, qzz per distance
    assert_eq!(ra.rows, 15);
    assert!(dir.path().join("a.csv.summary.json").exists());
    assert!(!progress_path(&a).exists());
}

#[test]
fn sweep_fills_param_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    run(small_cusp(), "x", Some(out.clone())).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let params: Vec<f64> = text
        .lines()
        .skip(2)
        .filter(|l| l.contains(",exact,"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(params.len(), 3);
    for (p, want) in params.iter().zip([-1.2, -1.0, -0.8]) {
        assert!((p - want).abs() < 1e-12, "{p}");
    }
}

#[test]
fn sweep_resumes_from_progress() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let doc = small_cusp();
    let hash = localent_cli::config::ExperimentConfig::from_value(doc.clone()).unwrap().hash();
    // a planted point 1 must survive into the output untouched
    let mut planted = Row::value("exact", Some(1), Some(0), Some(1), 0.125, "planted");
    planted.param = Some(-1.0);
    {
        let (mut log, _) = Progress::open(&progress_path(&out), &hash).unwrap();
        log.record(1, &[planted.clone()], 0.0).unwrap();
    }
    let report = run(doc.clone(), "x", Some(out.clone())).unwrap();
    assert_eq!(report.resumed, 1);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == planted.to_csv()));
    assert!(!progress_path(&out).exists());

    // a log from a different config is ignored
    {
        let (mut log, _) = Progress::open(&progress_path(&out), "other").unwrap();
        log.record(1, &[planted.clone()], 0.0).unwrap();
    }
    let report = run(doc, "x", Some(out.clone())).unwrap();
    assert_eq!(report.resumed, 0);
    assert!(!fs::read_to_string(&out).unwrap().contains("planted"));
}

#[test]
fn empty_grid_is_a_config_error() {
    let doc = preset("xxx-cusp", &["sweep.start=1.0", "sweep.stop=0.0"]);
    let dir = tempfile::tempdir().unwrap();
    let err = run(doc, "x", Some(dir.path().join("e.csv"))).unwrap_err();
    assert!(matches!(err, CliError::Config { .. }), "{err}");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn entropy_on_mixture_fails_before_compute() {
    let doc = preset("ising-fig2-right", &["model.ground=\"mixture\"", "task.measure=\"entropy\""]);
    let dir = tempfile::tempdir().unwrap();
    let err = run(doc, "x", Some(dir.path().join("m.csv"))).unwrap_err();
    assert!(matches!(err, CliError::Config { .. }), "{err}");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn sweep_point_errors_name_the_value() {
    // N = 1 is rejected at the second grid point, before the first is computed
    let doc = preset("aklt-end-to-end", &["sweep.values=[2, 0]"]);
    let dir = tempfile::tempdir().unwrap();
    let err = run(doc, "x", Some(dir.path().join("p.csv"))).unwrap_err();
    assert!(matches!(err, CliError::Config { .. }), "{err}");
    assert!(!progress_path(&dir.path().join("p.csv")).exists());
}

#[test]
fn presets_keep_their_task() {
    let doc = preset("string-order-aklt", &[]);
    let cfg = localent_cli::config::ExperimentConfig::from_value(doc).unwrap();
    assert_eq!(cfg.task.kind, TaskKind::StringOrder);
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "good.toml",
        "[model]\nfamily = \"ising\"\nn_sites = 6\nlambda = 0.5\n\n[task]\nkind = \"le_exact\"\nn_min = 1\nn_max = 2\nstrategy = \"standard\"\n",
    );
    let out = dir.path().join("good.csv");
    let st = bin().arg("run").arg(&good).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4);

    let st = bin().arg("run").arg(&good).args(["--override", "task.n_min=0"]).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let bad = write(dir.path(), "bad.toml", "[model]\nfamily = \"ising\"\nn_sites = 6\nlambda = 0.5\nbogus = 1\n\n[task]\nkind = \"le_exact\"\n");
    let o = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let st = bin().args(["preset", "no-such-preset"]).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let st = bin().arg("run").arg(dir.path().join("missing.toml")).status().unwrap();
    assert_eq!(st.code(), Some(1));
}
