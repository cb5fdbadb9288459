//! Connected correlations, their maximization, LE bounds and string order.

use std::f64::consts::{PI, TAU};

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::hilbert::QuantumState;
use crate::linalg::{pauli, pauli_dot, spectral_radius, spin, CMat, CVec, C64};
use crate::measures::{f_of_c, schmidt};
use crate::mps::{transfer_of, MatrixProductState};
use crate::TwoSiteState;

/// A local observable with spectrum in [-1, 1].
#[derive(Clone, Debug)]
pub enum ObservableSpec {
    /// `a . sigma` on a qubit.
    Bloch([f64; 3]),
    Matrix(CMat),
}

impl ObservableSpec {
    pub fn bloch(a: [f64; 3]) -> Result<Self> {
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("direction has norm {n}")));
        }
        Ok(Self::Bloch(a))
    }

    pub fn matrix(m: CMat) -> Result<Self> {
        if !m.is_square() || (&m - m.adjoint()).norm() > 1e-10 {
            return Err(Error::InvalidSpec("observable is not Hermitian".into()));
        }
        let ev = m.clone().symmetric_eigen().eigenvalues;
        if ev.iter().any(|x| x.abs() > 1.0 + 1e-9) {
            return Err(Error::InvalidSpec("observable spectrum outside [-1, 1]".into()));
        }
        Ok(Self::Matrix(m))
    }

    pub fn to_matrix(&self) -> CMat {
        match self {
            Self::Bloch(a) => pauli_dot(a),
            Self::Matrix(m) => m.clone(),
        }
    }
}

/// `<S_A^i S_B^j> - <S_A^i><S_B^j>`.
pub fn connected_correlation<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize, a: &ObservableSpec, b: &ObservableSpec) -> Result<f64> {
    if i == j {
        return Err(Error::DimMismatch("correlation needs two distinct sites".into()));
    }
    let (ma, mb) = (a.to_matrix(), b.to_matrix());
    let ab = state.expect_product(&[(i, ma.clone()), (j, mb.clone())])?;
    let ea = state.expect_product(&[(i, ma)])?;
    let eb = state.expect_product(&[(j, mb)])?;
    Ok((ab - ea * eb).re)
}

/// Two-qubit connected correlations `Q[(alpha, beta)]` for Paulis x, y, z.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix(pub Matrix3<f64>);

impl QMatrix {
    /// Largest singular value with its left and right singular vectors.
    pub fn max_singular(&self) -> (f64, [f64; 3], [f64; 3]) {
        let svd = self.0.svd(true, true);
        let k = svd.singular_values.imax();
        let u = svd.u.expect("requested").column(k).into_owned();
        let v = svd.v_t.expect("requested").row(k).transpose();
        (svd.singular_values[k], [u[0], u[1], u[2]], [v[0], v[1], v[2]])
    }
}

pub fn q_matrix<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize) -> Result<QMatrix> {
    let dims = state.site_dims();
    if dims.dim(i) != 2 || dims.dim(j) != 2 {
        return Err(Error::DimMismatch("Q matrix needs two qubits".into()));
    }
    if i == j {
        return Err(Error::DimMismatch("correlation needs two distinct sites".into()));
    }
    let single_i: Vec<f64> = (0..3).map(|a| state.expect_product(&[(i, pauli(a))]).map(|z| z.re)).collect::<Result<_>>()?;
    let single_j: Vec<f64> = (0..3).map(|b| state.expect_product(&[(j, pauli(b))]).map(|z| z.re)).collect::<Result<_>>()?;
    let mut q = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            q[(a, b)] = state.expect_product(&[(i, pauli(a)), (j, pauli(b))])?.re - single_i[a] * single_j[b];
        }
    }
    Ok(QMatrix(q))
}

/// Maximal connected correlation over qubit observables `a.sigma`, `b.sigma`.
pub fn max_correlation_qubits<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize) -> Result<(f64, [f64; 3], [f64; 3])> {
    Ok(q_matrix(state, i, j)?.max_singular())
}

#[derive(Clone, Debug)]
pub struct QutritBound {
    /// Symmetric stationary point, when it lies inside the family.
    pub q_sym: Option<f64>,
    pub q_diag: f64,
    /// Numerical maximum over the two-angle family.
    pub q_search: f64,
    pub q_max: f64,
    /// `f(q_max)`, a lower bound on the entropy of entanglement.
    pub e_lower: f64,
    /// Upper bound on `q_max` from merging the smallest Schmidt weight into the middle one.
    pub upper: f64,
    /// Schmidt coefficients in ascending order.
    pub lambdas: [f64; 3],
}

/// Correlation of the two-angle family with `cos theta = c`, `cos theta' = cp`.
fn qutrit_family(l: &[f64; 3], c: f64, cp: f64) -> f64 {
    let (l1, l2, l3) = (l[0] * l[0], l[1] * l[1], l[2] * l[2]);
    let s = (1.0 - c * c).max(0.0).sqrt();
    let sp = (1.0 - cp * cp).max(0.0).sqrt();
    l1 + c * cp * (l2 + l3) + 2.0 * s * sp * l[1] * l[2] - (l1 + (l2 - l3) * c) * (l1 + (l2 - l3) * cp)
}

/// Maximal correlation of a pure two-qutrit state over the optimal operator
/// family, with the entanglement lower bound it implies.
pub fn qutrit_correlation_bound(psi: &TwoSiteState) -> Result<QutritBound> {
    if psi.local_dims() != (3, 3) {
        return Err(Error::DimMismatch("qutrit bound needs two qutrits".into()));
    }
    let mut l: Vec<f64> = schmidt(psi)?.coeffs;
    l.resize(3, 0.0);
    l.sort_by(|a, b| a.total_cmp(b));
    let lambdas = [l[0], l[1], l[2]];
    let (l1, l2, l3) = (l[0], l[1], l[2]);
    let delta = l2 * l2 - l3 * l3;
    let den = (l2 - l3).powi(2) - delta * delta;
    let q_sym = if den.abs() > 1e-14 {
        let c = l1 * l1 * delta / den;
        (-1.0..=1.0).contains(&c).then(|| qutrit_family(&lambdas, c, c))
    } else if (l1 * l1 * delta).abs() <= 1e-14 {
        // flat along the diagonal
        Some(qutrit_family(&lambdas, 0.0, 0.0))
    } else {
        None
    };
    let q_diag = qutrit_family(&lambdas, 1.0, 1.0);
    // grid over both angles, then shrink around the best point
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let n = 200;
    for a in 0..=n {
        for b in 0..=n {
            let (t, tp) = (PI * a as f64 / n as f64, PI * b as f64 / n as f64);
            let v = qutrit_family(&lambdas, t.cos(), tp.cos());
            if v > best.0 {
                best = (v, t, tp);
            }
        }
    }
    let mut step = PI / n as f64;
    for _ in 0..40 {
        let (_, t0, tp0) = best;
        for da in -2..=2 {
            for db in -2..=2 {
                let (t, tp) = ((t0 + da as f64 * step).clamp(0.0, PI), (tp0 + db as f64 * step).clamp(0.0, PI));
                let v = qutrit_family(&lambdas, t.cos(), tp.cos());
                if v > best.0 {
                    best = (v, t, tp);
                }
            }
        }
        step *= 0.5;
    }
    let q_search = best.0;
    let q_max = q_sym.unwrap_or(f64::NEG_INFINITY).max(q_diag).max(q_search);
    Ok(QutritBound {
        q_sym,
        q_diag,
        q_search,
        q_max,
        e_lower: f_of_c(q_max.clamp(0.0, 1.0))?,
        upper: 2.0 * (l1 * l1 + l2 * l2).sqrt() * l3,
        lambdas,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ParityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// LE bounds for parity-symmetric qubit states: the largest diagonal
/// connected correlation below, `(sqrt(s+) + sqrt(s-))/2` above.
pub fn le_bounds_parity<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize) -> Result<ParityBounds> {
    let q = q_matrix(state, i, j)?.0;
    let lower = q[(0, 0)].abs().max(q[(1, 1)].abs()).max(q[(2, 2)].abs());
    let z = pauli(2);
    let zz = state.expect_product(&[(i, z.clone()), (j, z.clone())])?.re;
    let zi = state.expect_product(&[(i, z.clone())])?.re;
    let zj = state.expect_product(&[(j, z)])?.re;
    let sp = ((1.0 + zz).powi(2) - (zi + zj).powi(2)).max(0.0);
    let sm = ((1.0 - zz).powi(2) - (zi - zj).powi(2)).max(0.0);
    Ok(ParityBounds { lower, upper: (sp.sqrt() + sm.sqrt()) / 2.0 })
}

/// `S_z / s`: `sigma_z` on qubits, `S_z` on spin-1.
fn end_operator(d: usize) -> CMat {
    spin(d)[2].clone() * C64::from(2.0 / (d - 1) as f64)
}

/// `exp(i pi S_z)` for spin-1, `diag(-1, 1, -1)`.
pub fn spin_one_string() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C64::from(-1.0), C64::from(1.0), C64::from(-1.0)]))
}

fn string_ops<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize, r: Option<&CMat>) -> Result<(CMat, Vec<(usize, CMat)>, CMat)> {
    let dims = state.site_dims();
    if i == j || i >= dims.n_sites() || j >= dims.n_sites() {
        return Err(Error::DimMismatch(format!("bad string ends ({i}, {j})")));
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let mut inner = Vec::new();
    for k in lo + 1..hi {
        let op = match r {
            Some(m) => m.clone(),
            None if dims.dim(k) == 3 => spin_one_string(),
            None => return Err(Error::DimMismatch(format!("no default string operator for dimension {}", dims.dim(k)))),
        };
        inner.push((k, op));
    }
    Ok((end_operator(dims.dim(lo)), inner, end_operator(dims.dim(hi))))
}

/// `<S_z^i R_{i+1} ... R_{j-1} S_z^j>` with `S_z` normalized by the spin
/// (`sigma_z` on spin-1/2 ends). `r = None` uses `exp(i pi S_z)` on spin-1 sites.
pub fn string_order<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize, r: Option<&CMat>) -> Result<f64> {
    let (a, inner, b) = string_ops(state, i, j, r)?;
    let (lo, hi) = (i.min(j), i.max(j));
    let mut ops = vec![(lo, a)];
    ops.extend(inner);
    ops.push((hi, b));
    Ok(state.expect_product(&ops)?.re)
}

/// Connected (cumulant) version of the string correlation, treating the end
/// operators and the string as three blocks.
pub fn string_order_connected<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize, r: Option<&CMat>) -> Result<f64> {
    let (a, inner, b) = string_ops(state, i, j, r)?;
    let (lo, hi) = (i.min(j), i.max(j));
    let e = |ops: Vec<(usize, CMat)>| -> Result<f64> {
        if ops.is_empty() {
            return Ok(1.0);
        }
        Ok(state.expect_product(&ops)?.re)
    };
    let ea = vec![(lo, a.clone())];
    let eb = vec![(hi, b.clone())];
    let cat = |x: &[Vec<(usize, CMat)>]| x.concat();
    let (pa, ps, pb) = (e(ea.clone())?, e(inner.clone())?, e(eb.clone())?);
    let pas = e(cat(&[ea.clone(), inner.clone()]))?;
    let psb = e(cat(&[inner.clone(), eb.clone()]))?;
    let pab = e(cat(&[ea.clone(), eb.clone()]))?;
    let all = e(cat(&[ea, inner, eb]))?;
    Ok(all - pas * pb - pa * psb - pab * ps + 2.0 * pa * ps * pb)
}

#[derive(Clone, Debug)]
pub struct CsoResult {
    /// Some non-trivial observable matches the dominant transfer eigenvalue.
    pub holds: bool,
    /// `max rho(E_O) / rho(E_1)` found.
    pub best_ratio: f64,
    pub observable: CMat,
    /// Some restart stopped on the iteration budget rather than converging.
    pub budget_exhausted: bool,
}

/// Non-trivial Hermitian involution from search parameters.
fn involution(d: usize, p: &[f64], sign: f64) -> CMat {
    match d {
        2 => {
            let (t, f) = (p[0], p[1]);
            pauli_dot(&[t.sin() * f.cos(), t.sin() * f.sin(), t.cos()])
        }
        _ => {
            // 1 - 2|v><v| with v from 2(d-1) angles
            let mut v = CVec::zeros(d);
            for k in 0..d {
                let re = p.get(2 * k).copied().unwrap_or(1.0);
                let im = p.get(2 * k + 1).copied().unwrap_or(0.0);
                v[k] = C64::new(re, im);
            }
            let v = v.normalize();
            (CMat::identity(d, d) - &v * v.adjoint() * C64::from(2.0)) * C64::from(sign)
        }
    }
}

struct CsoObjective<'a> {
    mats: &'a [CMat],
    sign: f64,
}

impl CostFunction for CsoObjective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let o = involution(self.mats.len(), p, self.sign);
        let e = transfer_of(self.mats, &o).map_err(|e| argmin::core::Error::msg(e.to_string()))?;
        Ok(-spectral_radius(&e))
    }
}

/// Necessary condition for a non-vanishing connected string order: some
/// non-trivial single-site observable `O` with `rho(E_O) = rho(E_1)`. The
/// search runs over Hermitian involutions `O != +-1`, with `restarts` random
/// starts besides the axis-aligned ones.
pub fn cso_necessary_condition_mps(mps: &MatrixProductState, restarts: usize, seed: u64) -> Result<CsoResult> {
    use rand::{Rng, SeedableRng};
    if mps.bond_dim() != 2 {
        return Err(Error::WrongBondDim { expected: 2, found: mps.bond_dim() });
    }
    let d = mps.d();
    let mats = mps.bulk(0);
    let lambda1 = mps.transfer_radius();
    let n_params = if d == 2 { 2 } else { 2 * d };
    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    if d == 2 {
        for p in [[0.0, 0.0], [PI / 2.0, 0.0], [PI / 2.0, PI / 2.0]] {
            starts.push((p.to_vec(), 1.0));
        }
    } else {
        for k in 0..d {
            let mut p = vec![0.0; n_params];
            p[2 * k] = 1.0;
            starts.push((p.clone(), 1.0));
            starts.push((p, -1.0));
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for r in 0..restarts {
        let p: Vec<f64> = (0..n_params).map(|_| if d == 2 { rng.gen_range(0.0..TAU) } else { rng.gen_range(-1.0..1.0) }).collect();
        starts.push((p, if r % 2 == 0 { 1.0 } else { -1.0 }));
    }
    let mut best = (f64::NEG_INFINITY, CMat::identity(d, d));
    let mut exhausted = false;
    for (x0, sign) in starts {
        let mut simplex = vec![x0.clone()];
        for k in 0..n_params {
            let mut v = x0.clone();
            v[k] += 0.25;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-12).map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let res = Executor::new(CsoObjective { mats, sign }, solver)
            .configure(|c| c.max_iters(500))
            .run()
            .map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let st = res.state();
        if matches!(st.get_termination_status(), TerminationStatus::Terminated(TerminationReason::MaxItersReached)) {
            exhausted = true;
        }
        let p = st.get_best_param().cloned().unwrap_or(x0);
        let value = -st.get_best_cost();
        if value > best.0 {
            best = (value, involution(d, &p, sign));
        }
    }
    let ratio = best.0 / lambda1;
    Ok(CsoResult { holds: ratio >= 1.0 - 1e-6, best_ratio: ratio, observable: best.1, budget_exhausted: exhausted })
}

/// `a^T Q b`, the connected correlation of `a.sigma`, `b.sigma`.
pub fn bilinear(q: &QMatrix, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (Vector3::from(*a).transpose() * q.0 * Vector3::from(*b))[(0, 0)]
}
