//! One task on one model: prepare the state, pick pairs and strategies, emit rows.

use std::path::Path;

use localent::correlations::{
    connected_correlation, le_bounds_parity, max_correlation_qubits, string_order, string_order_connected, ObservableSpec,
};
use localent::hilbert::{
    build_hamiltonian, build_named_state, ground_state, Boundary, DensityOperator, ModelFamily, ModelSpec, NamedState,
    PureState, QuantumState, SiteDims, ThermalSpectrum,
};
use localent::le::{
    le_exact, le_monte_carlo, le_thermal_exact, optimize_le, EnsembleInput, LeEstimate, McOptions, Measure,
    MeasurementStrategy, NamedBasis, OptimizeOptions,
};
use localent::linalg::{CMat, C64};
use localent::measures::entanglement_of_assistance;
use localent::mps::{
    densify, from_dense, ingest_mps, le_analytic_qubit_bond, mps_named, string_order_analytic, MatrixProductState,
    MpsFamily,
};
use localent::TwoSiteState;

use crate::config::{BoundaryKind, ExperimentConfig, Family, GroundChoice, StrategyKind, TaskKind};
use crate::error::{CliError, Context};
use crate::output::Row;

pub enum Prepared {
    Pure(PureState),
    Mixed(DensityOperator),
    Mps { mps: MatrixProductState, n: usize },
    Thermal(ThermalSpectrum),
}

fn cfg_err(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), msg: msg.into() }
}

fn model_spec(cfg: &ExperimentConfig) -> Option<ModelSpec> {
    let m = &cfg.model;
    let family = match m.family {
        Family::Ising => ModelFamily::IsingTransverse { lambda: m.lambda? },
        Family::Xxz => ModelFamily::Xxz { delta: m.delta?, h_over_j: m.h.unwrap_or(0.0) },
        Family::Heisenberg => ModelFamily::HeisenbergBiquadratic { beta: m.beta? },
        Family::Aklt => ModelFamily::Aklt,
        _ => return None,
    };
    let boundary = match m.boundary {
        BoundaryKind::Open => Boundary::Open,
        BoundaryKind::Periodic => Boundary::Periodic,
    };
    let spec = ModelSpec::new(family, m.n_sites, boundary);
    Some(if m.end_spins { spec.with_end_spins() } else { spec })
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, CliError> {
    let m = &cfg.model;
    if let Some(spec) = model_spec(cfg) {
        let h = build_hamiltonian(&spec).context(|| "building the Hamiltonian".into())?;
        if cfg.effective_kind() == TaskKind::Thermal {
            return ThermalSpectrum::new(&h).map(Prepared::Thermal).context(|| "full spectrum".into());
        }
        let spectrum = ground_state(&h, 1, 1e-8).context(|| "ground state".into())?;
        return match m.ground {
            GroundChoice::Canonical => Ok(Prepared::Pure(spectrum.canonical_ground_state())),
            GroundChoice::Mixture => spectrum.ground_mixture().map(Prepared::Mixed).context(|| "ground mixture".into()),
        };
    }
    if cfg.effective_kind() == TaskKind::Thermal {
        return Err(cfg_err("task.kind", "thermal runs need a Hamiltonian family"));
    }
    match m.family {
        Family::Named => {
            let name = match m.state.as_deref() {
                Some("ghz") => NamedState::Ghz,
                Some("cluster") => NamedState::Cluster,
                Some("product") => NamedState::ProductAllZero,
                other => return Err(cfg_err("model.state", format!("unknown named state {other:?}"))),
            };
            build_named_state(name, m.n_sites).map(Prepared::Pure).context(|| "named state".into())
        }
        Family::Mps => {
            let mps = match (&m.file, m.state.as_deref()) {
                (Some(path), _) => ingest_mps(path).context(|| format!("reading {}", path.display()))?,
                (None, Some("aklt")) => mps_named(MpsFamily::Aklt),
                (None, Some("counterexample")) => mps_named(MpsFamily::CounterexampleC),
                (None, Some("ghz")) => mps_named(MpsFamily::Ghz),
                (None, other) => return Err(cfg_err("model.state", format!("unknown MPS family {other:?}"))),
            };
            let n = mps.fixed_len().unwrap_or(m.n_sites);
            Ok(Prepared::Mps { mps, n })
        }
        Family::StateFile => {
            let path = m.file.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).context(|| format!("reading {}", path.display()))?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| cfg_err("model.file", format!("{}: {e}", path.display())))?;
            PureState::from_json(&v).map(Prepared::Pure).context(|| format!("parsing {}", path.display()))
        }
        _ => unreachable!("Hamiltonian families handled above"),
    }
}

impl Prepared {
    pub fn dims(&self) -> Result<SiteDims, CliError> {
        Ok(match self {
            Self::Pure(p) => p.dims().clone(),
            Self::Mixed(r) => r.dims().clone(),
            Self::Mps { mps, n } => mps.site_dims(*n).context(|| "MPS site dimensions".into())?,
            Self::Thermal(t) => t.dims().clone(),
        })
    }

    fn dense(&self) -> Result<Option<PureState>, CliError> {
        match self {
            Self::Mps { mps, n } => densify(mps, *n).map(Some).context(|| "densifying the MPS".into()),
            Self::Pure(p) => Ok(Some(p.clone())),
            _ => Ok(None),
        }
    }
}

/// `(n, i, j)` for every pair the task covers.
pub fn pairs(cfg: &ExperimentConfig, dims: &SiteDims) -> Result<Vec<(usize, usize, usize)>, CliError> {
    let t = &cfg.task;
    let len = dims.n_sites();
    if t.ends {
        return Ok(vec![(len - 1, 0, len - 1)]);
    }
    if let Some([i, j]) = t.pair {
        if i.max(j) >= len {
            return Err(cfg_err("task.pair", format!("site out of range for {len} sites")));
        }
        return Ok(vec![(i.abs_diff(j), i.min(j), i.max(j))]);
    }
    let mut out = Vec::new();
    for n in t.n_min..=t.n_max {
        let i = if t.centered { (len.saturating_sub(1 + n)) / 2 } else { t.origin };
        let j = i + n;
        if j >= len {
            return Err(cfg_err("task.n_max", format!("pair ({i}, {j}) does not fit in {len} sites")));
        }
        out.push((n, i, j));
    }
    Ok(out)
}

fn parse_basis_file(path: &Path, n_sites: usize) -> Result<Vec<Option<CMat>>, CliError> {
    let bad = |msg: String| cfg_err("task.strategy_file", msg);
    let text = std::fs::read_to_string(path).context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let sites = v.get("bases").and_then(|b| b.as_array()).ok_or_else(|| bad("expected {\"bases\": [...]}".into()))?;
    if sites.len() != n_sites {
        return Err(bad(format!("{} bases for {n_sites} sites", sites.len())));
    }
    sites
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if s.is_null() {
                return Ok(None);
            }
            let rows = s.as_array().ok_or_else(|| bad(format!("bases[{k}] is not a matrix")))?;
            let d = rows.len();
            let mut entries = Vec::with_capacity(d * d);
            for (r, row) in rows.iter().enumerate() {
                let row = row.as_array().filter(|x| x.len() == d).ok_or_else(|| bad(format!("bases[{k}][{r}] must have {d} entries")))?;
                for (c, z) in row.iter().enumerate() {
                    let pair = z
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .and_then(|p| Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)))
                        .ok_or_else(|| bad(format!("bases[{k}][{r}][{c}] must be [re, im]")))?;
                    entries.push(pair);
                }
            }
            Ok(Some(CMat::from_row_slice(d, d, &entries)))
        })
        .collect()
}

/// Fixed strategy for the pair, `None` when the basis is to be optimized.
fn strategy(cfg: &ExperimentConfig, dims: &SiteDims, i: usize, j: usize) -> Result<Option<MeasurementStrategy>, CliError> {
    let uheis = NamedBasis::UHeis.unitary(3).expect("qutrit basis");
    let ctx = || format!("strategy for pair ({i}, {j})");
    let s = match cfg.task.strategy {
        StrategyKind::Optimize => return Ok(None),
        StrategyKind::Standard => MeasurementStrategy::standard(dims, i, j),
        StrategyKind::SigmaX => MeasurementStrategy::named(dims, i, j, NamedBasis::SigmaX),
        StrategyKind::SigmaY => MeasurementStrategy::named(dims, i, j, NamedBasis::SigmaY),
        StrategyKind::UBasis => MeasurementStrategy::uniform(
            dims,
            i,
            j,
            |d| Some(if d == 3 { uheis.clone() } else { CMat::identity(d, d) }),
            "u_basis",
        ),
        StrategyKind::UBetween => MeasurementStrategy::from_fn(
            dims,
            i,
            j,
            |k, d| Some(if d == 3 && k > i && k < j { uheis.clone() } else { CMat::identity(d, d) }),
            "u_between",
        ),
        StrategyKind::File => {
            let path = cfg.task.strategy_file.as_ref().expect("validated");
            let bases = parse_basis_file(path, dims.n_sites())?;
            MeasurementStrategy::new(dims, i, j, bases, "file")
        }
    };
    s.map(Some).context(ctx)
}

fn le_on<S: EnsembleInput + ?Sized>(
    state: &S,
    cfg: &ExperimentConfig,
    fixed: Option<&MeasurementStrategy>,
    i: usize,
    j: usize,
    measure: Measure,
) -> Result<LeEstimate, CliError> {
    let ctx = || format!("LE for pair ({i}, {j})");
    match fixed {
        Some(s) => le_exact(state, s, measure).context(ctx),
        None => {
            let opts = OptimizeOptions {
                restarts: cfg.task.restarts,
                per_site: cfg.task.per_site,
                seed: cfg.mc.seed,
                ..OptimizeOptions::default()
            };
            optimize_le(state, i, j, measure, &opts).context(ctx)
        }
    }
}

fn exact_estimate(
    prep: &Prepared,
    dense: Option<&PureState>,
    cfg: &ExperimentConfig,
    fixed: Option<&MeasurementStrategy>,
    i: usize,
    j: usize,
    measure: Measure,
) -> Result<LeEstimate, CliError> {
    match (prep, dense) {
        (Prepared::Mixed(rho), _) => le_on(rho, cfg, fixed, i, j, measure),
        (_, Some(psi)) => le_on(psi, cfg, fixed, i, j, measure),
        _ => Err(cfg_err("task.kind", "no state to enumerate")),
    }
}

fn reduced_pair<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize) -> Result<TwoSiteState, CliError> {
    let d = state.site_dims();
    let rho = state.reduced(&[i, j]).context(|| format!("reduced state on ({i}, {j})"))?;
    TwoSiteState::mixed(rho, d.dim(i), d.dim(j)).context(|| "reduced state".into())
}

fn as_state<'a>(prep: &'a Prepared, dense: Option<&'a PureState>) -> Option<&'a dyn QuantumState> {
    match (prep, dense) {
        (Prepared::Mixed(r), _) => Some(r),
        (_, Some(p)) => Some(p),
        _ => None,
    }
}

fn mc_rows(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    fixed: &MeasurementStrategy,
    (n, i, j): (usize, usize, usize),
    measure: Measure,
) -> Result<Row, CliError> {
    let (mps, len) = match prep {
        Prepared::Mps { mps, n } => (mps.clone(), *n),
        Prepared::Pure(psi) => {
            let mps = from_dense(psi, cfg.model.max_bond).context(|| "MPS from the dense state".into())?;
            (mps, psi.dims().n_sites())
        }
        _ => return Err(cfg_err("task.kind", "Monte Carlo needs a pure state or an MPS")),
    };
    let opts = McOptions { sweeps: cfg.mc.sweeps, burn_in: cfg.mc.burn_in, chains: cfg.mc.chains, seed: cfg.mc.seed };
    let est = le_monte_carlo(&mps, len, fixed, measure, &opts).context(|| format!("Monte Carlo for pair ({i}, {j})"))?;
    Ok(Row::estimate("mc", n, i, j, &est))
}

pub fn run_task(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Vec<Row>, CliError> {
    let measure = cfg.measure()?;
    let dims = prep.dims()?;
    let kind = cfg.effective_kind();
    let mut rows = Vec::new();

    if let Prepared::Thermal(th) = prep {
        for &(n, i, j) in &pairs(cfg, &dims)? {
            let s = strategy(cfg, &dims, i, j)?.ok_or_else(|| cfg_err("task.strategy", "thermal runs use a fixed strategy"))?;
            for &t in &cfg.task.temperatures {
                let est = le_thermal_exact(th, t, &s, measure).context(|| format!("thermal LE at T = {t}"))?;
                let mut row = Row::estimate("thermal", n, i, j, &est);
                row.param = Some(t);
                rows.push(row);
            }
        }
        return Ok(rows);
    }

    if kind == TaskKind::StringOrder {
        if let Prepared::Mps { mps, .. } = prep {
            let r = localent::correlations::spin_one_string();
            let mut asym = None;
            for n in cfg.task.n_min..=cfg.task.n_max {
                let so = string_order_analytic(mps, n, &r).context(|| format!("string order at n = {n}"))?;
                rows.push(Row::value("string_analytic", Some(n), None, None, so.finite, "transfer"));
                asym = so.asymptotic;
            }
            if let Some(a) = asym {
                rows.push(Row::value("string_asymptotic", None, None, None, a, "transfer"));
            }
            return Ok(rows);
        }
    }

    let dense = match (kind, prep) {
        (TaskKind::LeMc, Prepared::Mps { .. }) => None,
        _ => prep.dense()?,
    };
    for (n, i, j) in pairs(cfg, &dims)? {
        let fixed = strategy(cfg, &dims, i, j)?;
        let qubits = dims.dim(i) == 2 && dims.dim(j) == 2;
        match kind {
            TaskKind::LeExact | TaskKind::Fluctuations => {
                let est = exact_estimate(prep, dense.as_ref(), cfg, fixed.as_ref(), i, j, measure)?;
                let mut row = if kind == TaskKind::Fluctuations {
                    let mut r = Row::estimate("fluctuation", n, i, j, &est);
                    r.value = est.fluctuation;
                    r
                } else {
                    Row::estimate("exact", n, i, j, &est)
                };
                if qubits {
                    if let Some(st) = as_state(prep, dense.as_ref()) {
                        let red = reduced_pair(st, i, j)?;
                        row.upper_bound = Some(entanglement_of_assistance(&red).context(|| "assistance bound".into())?);
                    }
                }
                rows.push(row);
                if cfg.task.with_mc && kind == TaskKind::LeExact {
                    rows.push(mc_rows(prep, cfg, &est.strategy, (n, i, j), measure)?);
                }
                if let (Prepared::Mps { mps, n: len }, true) = (prep, cfg.task.ends) {
                    if mps.bond_dim() == 2 && mps.is_open() {
                        if let Ok(v) = le_analytic_qubit_bond(mps, *len, &est.strategy) {
                            rows.push(Row::value("analytic", Some(n), Some(i), Some(j), v, est.strategy.label()));
                        }
                    }
                }
                if cfg.task.correlations && qubits {
                    if let Some(st) = as_state(prep, dense.as_ref()) {
                        for (axis, name) in [(0, "qxx"), (1, "qyy"), (2, "qzz")] {
                            let mut v = [0.0; 3];
                            v[axis] = 1.0;
                            let o = ObservableSpec::bloch(v).expect("unit vector");
                            let q = connected_correlation(st, i, j, &o, &o).context(|| "correlation".into())?;
                            rows.push(Row::value(name, Some(n), Some(i), Some(j), q, "-"));
                        }
                    }
                }
            }
            TaskKind::LeMc => {
                let s = fixed.ok_or_else(|| cfg_err("task.strategy", "Monte Carlo runs use a fixed strategy"))?;
                rows.push(mc_rows(prep, cfg, &s, (n, i, j), measure)?);
            }
            TaskKind::Bounds => {
                let st = as_state(prep, dense.as_ref()).ok_or_else(|| cfg_err("task.kind", "bounds need a state"))?;
                if !qubits {
                    return Err(cfg_err("task.kind", "bounds are for qubit pairs"));
                }
                let b = le_bounds_parity(st, i, j).context(|| format!("parity bounds on ({i}, {j})"))?;
                let (q, _, _) = max_correlation_qubits(st, i, j).context(|| "maximal correlation".into())?;
                let mut row = Row::value("bounds", Some(n), Some(i), Some(j), q, "-");
                row.lower_bound = Some(b.lower);
                row.upper_bound = Some(b.upper);
                rows.push(row);
                let eoa = entanglement_of_assistance(&reduced_pair(st, i, j)?).context(|| "assistance bound".into())?;
                rows.push(Row::value("eoa", Some(n), Some(i), Some(j), eoa, "-"));
            }
            TaskKind::StringOrder => {
                let st = as_state(prep, dense.as_ref()).ok_or_else(|| cfg_err("task.kind", "string order needs a state"))?;
                let v = string_order(st, i, j, None).context(|| "string order".into())?;
                let c = string_order_connected(st, i, j, None).context(|| "connected string order".into())?;
                rows.push(Row::value("string", Some(n), Some(i), Some(j), v, "-"));
                rows.push(Row::value("string_connected", Some(n), Some(i), Some(j), c, "-"));
            }
            TaskKind::Thermal | TaskKind::Sweep => unreachable!("handled by the caller"),
        }
    }
    Ok(rows)
}
