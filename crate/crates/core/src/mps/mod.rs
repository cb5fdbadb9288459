//! Matrix product states with periodic or open (end-vector) boundaries.
//!
//! An open MPS carries explicit end sites: the left end's state `alpha`
//! selects the row vector `left[alpha]`, the right end's state `beta` the
//! column vector `right[beta]`. Chain sites are then ordered
//! `[left end, bulk 0..N, right end]`, and every amplitude is
//! `left[alpha] A^{s_1} ... A^{s_N} right[beta]`. A periodic MPS has only
//! bulk sites and amplitudes `Tr(A^{s_1} ... A^{s_N})`.

mod analytic;
mod conditional;
mod io;

pub use analytic::{
    e_a, le_analytic_optimal, le_analytic_qubit_bond, optimal_basis_qubit_bond, string_order_analytic, sum_abs_det, StringOrderResult,
};
pub use conditional::{conditional_state, ConditionalEvaluator};
pub use io::{ingest_mps, ingest_mps_str, mps_to_json};

use crate::error::{Error, Result};
use crate::hilbert::{PureState, SiteDims, AMPLITUDE_CAP};
use crate::linalg::{cmat, pauli, spectral_radius, CMat, CVec, C64, I, ONE, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub enum MpsBoundary {
    Periodic,
    Open { left: Vec<CVec>, right: Vec<CVec> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tensors {
    /// One set of `d` matrices reused on every bulk site.
    Uniform(Vec<CMat>),
    /// `sites[k][s]` for each bulk site.
    Sites(Vec<Vec<CMat>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixProductState {
    d: usize,
    bond: usize,
    tensors: Tensors,
    boundary: MpsBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpsFamily {
    Aklt,
    CounterexampleC,
    Ghz,
}

impl std::str::FromStr for MpsFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aklt" => Ok(Self::Aklt),
            "counterexample" | "counterexamplec" | "counterexample_c" => Ok(Self::CounterexampleC),
            "ghz" => Ok(Self::Ghz),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

fn check_matrices(mats: &[CMat], d: usize, bond: usize, what: &str) -> Result<()> {
    if mats.len() != d {
        return Err(Error::Schema { field: what.into(), msg: format!("{} matrices, expected d = {d}", mats.len()) });
    }
    for (s, m) in mats.iter().enumerate() {
        if m.nrows() != bond || m.ncols() != bond {
            return Err(Error::Schema {
                field: format!("{what}[{s}]"),
                msg: format!("{}x{} matrix, expected D = {bond}", m.nrows(), m.ncols()),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Schema { field: format!("{what}[{s}]"), msg: "non-finite entry".into() });
        }
    }
    Ok(())
}

impl MatrixProductState {
    pub fn new(tensors: Tensors, boundary: MpsBoundary) -> Result<Self> {
        let first = match &tensors {
            Tensors::Uniform(a) => a.first(),
            Tensors::Sites(s) => s.first().and_then(|a| a.first()),
        }
        .ok_or_else(|| Error::Schema { field: "tensors".into(), msg: "no matrices".into() })?;
        let bond = first.nrows();
        let d = match &tensors {
            Tensors::Uniform(a) => a.len(),
            Tensors::Sites(s) => s[0].len(),
        };
        if d < 2 || bond < 1 {
            return Err(Error::Schema { field: "tensors".into(), msg: format!("d = {d}, D = {bond}") });
        }
        match &tensors {
            Tensors::Uniform(a) => check_matrices(a, d, bond, "tensors")?,
            Tensors::Sites(s) => {
                for (k, a) in s.iter().enumerate() {
                    check_matrices(a, d, bond, &format!("tensors[{k}]"))?;
                }
            }
        }
        if let MpsBoundary::Open { left, right } = &boundary {
            for (name, vs) in [("left", left), ("right", right)] {
                if vs.len() < 2 {
                    return Err(Error::Schema { field: format!("boundary.{name}"), msg: "need at least two end states".into() });
                }
                for (k, v) in vs.iter().enumerate() {
                    if v.len() != bond {
                        return Err(Error::Schema {
                            field: format!("boundary.{name}[{k}]"),
                            msg: format!("length {}, expected D = {bond}", v.len()),
                        });
                    }
                }
            }
        }
        Ok(Self { d, bond, tensors, boundary })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bond_dim(&self) -> usize {
        self.bond
    }

    pub fn tensors(&self) -> &Tensors {
        &self.tensors
    }

    pub fn boundary(&self) -> &MpsBoundary {
        &self.boundary
    }

    pub fn is_open(&self) -> bool {
        matches!(self.boundary, MpsBoundary::Open { .. })
    }

    /// Number of bulk sites fixed by the tensors, if not translation invariant.
    pub fn fixed_len(&self) -> Option<usize> {
        match &self.tensors {
            Tensors::Uniform(_) => None,
            Tensors::Sites(s) => Some(s.len()),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::DimMismatch("need at least one bulk site".into()));
        }
        match self.fixed_len() {
            Some(m) if m != n => Err(Error::DimMismatch(format!("MPS has {m} bulk sites, {n} requested"))),
            _ => Ok(()),
        }
    }

    pub fn bulk(&self, k: usize) -> &[CMat] {
        match &self.tensors {
            Tensors::Uniform(a) => a,
            Tensors::Sites(s) => &s[k],
        }
    }

    /// Local dimensions of all chain sites (end sites included).
    pub fn site_dims(&self, n: usize) -> Result<SiteDims> {
        self.check_len(n)?;
        let mut dims = vec![self.d; n];
        if let MpsBoundary::Open { left, right } = &self.boundary {
            dims.insert(0, left.len());
            dims.push(right.len());
        }
        SiteDims::unbounded(dims)
    }

    /// Per chain site, the matrix for every local state: `1 x D` for a left
    /// end, `D x 1` for a right end, `D x D` in the bulk.
    pub fn site_tensors(&self, n: usize) -> Result<Vec<Vec<CMat>>> {
        self.check_len(n)?;
        let mut out = Vec::with_capacity(n + 2);
        if let MpsBoundary::Open { left, .. } = &self.boundary {
            out.push(left.iter().map(|v| CMat::from_row_slice(1, v.len(), v.as_slice())).collect());
        }
        for k in 0..n {
            out.push(self.bulk(k).to_vec());
        }
        if let MpsBoundary::Open { right, .. } = &self.boundary {
            out.push(right.iter().map(|v| CMat::from_column_slice(v.len(), 1, v.as_slice())).collect());
        }
        Ok(out)
    }

    /// Transfer operator `E_O = sum_{s,s'} O_{s s'} conj(A^s) (x) A^{s'}` of bulk site `k`.
    pub fn transfer(&self, k: usize, o: &CMat) -> Result<CMat> {
        transfer_of(self.bulk(k), o)
    }

    /// Largest |eigenvalue| of the bulk identity transfer operator.
    pub fn transfer_radius(&self) -> f64 {
        let d = self.d;
        spectral_radius(&transfer_of(self.bulk(0), &CMat::identity(d, d)).expect("square"))
    }
}

pub fn transfer_of(mats: &[CMat], o: &CMat) -> Result<CMat> {
    if o.nrows() != mats.len() || o.ncols() != mats.len() {
        return Err(Error::DimMismatch(format!("{}x{} observable for d = {}", o.nrows(), o.ncols(), mats.len())));
    }
    let (r, c) = (mats[0].nrows(), mats[0].ncols());
    let mut e = CMat::zeros(r * r, c * c);
    for (s, a) in mats.iter().enumerate() {
        for (t, b) in mats.iter().enumerate() {
            let w = o[(s, t)];
            if w != ZERO {
                e += a.conjugate().kronecker(b) * w;
            }
        }
    }
    Ok(e)
}

/// AKLT tensors in the Cartesian basis: `i sigma_y, sigma_z, sigma_x`.
pub fn aklt_cartesian_tensors() -> Vec<CMat> {
    vec![pauli(1) * I, pauli(2), pauli(0)]
}

fn std_vectors() -> Vec<CVec> {
    vec![CVec::from_vec(vec![ONE, ZERO]), CVec::from_vec(vec![ZERO, ONE])]
}

/// Exact family states.
///
/// AKLT tensors are returned in the S_z basis (m = +1, 0, -1), obtained
/// from the Cartesian tensors by the basis change of `NamedBasis::UHeis`, so
/// densified states match the spin-1 Hamiltonians of `hilbert`. AKLT and the
/// counterexample carry qubit end sites with standard unit end vectors; GHZ
/// is periodic.
pub fn mps_named(family: MpsFamily) -> MatrixProductState {
    let open = || MpsBoundary::Open { left: std_vectors(), right: std_vectors() };
    match family {
        MpsFamily::Aklt => {
            let cart = aklt_cartesian_tensors();
            let u = crate::le::NamedBasis::UHeis.unitary(3).expect("qutrit");
            // |k>_cart = sum_s U[s,k] |s>  =>  A^s = sum_k U[s,k] A'^k
            let sz: Vec<CMat> = (0..3)
                .map(|s| (0..3).fold(CMat::zeros(2, 2), |acc, k| acc + &cart[k] * u[(s, k)]))
                .collect();
            MatrixProductState::new(Tensors::Uniform(sz), open()).expect("valid family")
        }
        MpsFamily::CounterexampleC => {
            let a1 = pauli(2) + pauli(1);
            let a2 = pauli(2) - CMat::identity(2, 2) * I;
            MatrixProductState::new(Tensors::Uniform(vec![a1, a2]), open()).expect("valid family")
        }
        MpsFamily::Ghz => {
            let a0 = cmat(2, 2, &[ONE, ZERO, ZERO, ZERO]);
            let a1 = cmat(2, 2, &[ZERO, ZERO, ZERO, ONE]);
            MatrixProductState::new(Tensors::Uniform(vec![a0, a1]), MpsBoundary::Periodic).expect("valid family")
        }
    }
}

/// MPS of a dense state on identical sites by successive SVDs, keeping at
/// most `max_bond` singular values per cut. Open-chain tensors are padded
/// into `D x D` matrices (first site uses row 0, last site column 0), so the
/// result is stored with a periodic boundary and the same amplitudes.
pub fn from_dense(psi: &PureState, max_bond: usize) -> Result<MatrixProductState> {
    let dims = psi.dims().dims();
    let d = dims[0];
    if dims.iter().any(|&x| x != d) || dims.len() < 2 || max_bond == 0 {
        return Err(Error::DimMismatch("SVD route needs at least two identical sites and a positive bond".into()));
    }
    let n = dims.len();
    let mut rest = CMat::from_row_slice(1, psi.amps().len(), psi.amps());
    let mut raw: Vec<Vec<CMat>> = Vec::with_capacity(n);
    for _ in 0..n - 1 {
        let (rl, cols) = (rest.nrows(), rest.ncols() / d);
        // rows (left bond, s), columns the remaining sites
        let m = CMat::from_fn(rl * d, cols, |r, c| rest[(r / d, (r % d) * cols + c)]);
        let svd = m.svd(true, true);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order.truncate(max_bond);
        let u = svd.u.expect("requested");
        let vt = svd.v_t.expect("requested");
        let keep = order.len();
        raw.push((0..d).map(|s| CMat::from_fn(rl, keep, |a, b| u[(a * d + s, order[b])])).collect());
        rest = CMat::from_fn(keep, cols, |a, c| vt[(order[a], c)] * svd.singular_values[order[a]]);
    }
    let rl = rest.nrows();
    raw.push((0..d).map(|s| CMat::from_fn(rl, 1, |a, _| rest[(a, s)])).collect());
    let bond = raw.iter().flat_map(|site| [site[0].nrows(), site[0].ncols()]).max().unwrap_or(1);
    let padded = raw
        .into_iter()
        .map(|site| {
            site.into_iter()
                .map(|m| {
                    let mut p = CMat::zeros(bond, bond);
                    p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(&m);
                    p
                })
                .collect()
        })
        .collect();
    MatrixProductState::new(Tensors::Sites(padded), MpsBoundary::Periodic)
}

/// Product of a list of matrices, `None` meaning the empty product.
#[cfg(test)]
pub(crate) fn chain_product<'a>(mats: impl Iterator<Item = &'a CMat>) -> Option<CMat> {
    mats.fold(None, |acc: Option<CMat>, m| Some(match acc {
        None => m.clone(),
        Some(p) => p * m,
    }))
}

/// Normalized dense state of `n` bulk sites (plus end sites for open chains).
pub fn densify(mps: &MatrixProductState, n: usize) -> Result<PureState> {
    let dims = mps.site_dims(n)?;
    if dims.total() > AMPLITUDE_CAP {
        return Err(Error::DimensionCap { requested: dims.total(), cap: AMPLITUDE_CAP });
    }
    let sites = mps.site_tensors(n)?;
    // partial products, indexed by the prefix assignment (site 0 most significant)
    let mut partial: Vec<CMat> = sites[0].clone();
    for site in &sites[1..] {
        let mut next = Vec::with_capacity(partial.len() * site.len());
        for p in &partial {
            for a in site {
                next.push(p * a);
            }
        }
        partial = next;
    }
    let amps: Vec<C64> = partial.iter().map(|m| m.trace()).collect();
    PureState::new(dims, amps)?.normalized()
}

/// `<O_1 ... O_N>` by transfer operators; `ops[k] = None` means identity.
/// `ops` covers all chain sites, end sites included.
pub fn expectation(mps: &MatrixProductState, n: usize, ops: &[Option<CMat>]) -> Result<C64> {
    let sites = mps.site_tensors(n)?;
    if ops.len() != sites.len() {
        return Err(Error::DimMismatch(format!("{} operators for {} sites", ops.len(), sites.len())));
    }
    let mut num: Option<CMat> = None;
    let mut den: Option<CMat> = None;
    for (site, op) in sites.iter().zip(ops) {
        let id = CMat::identity(site.len(), site.len());
        let e1 = transfer_of(site, &id)?;
        let eo = match op {
            Some(o) => transfer_of(site, o)?,
            None => e1.clone(),
        };
        num = Some(match num {
            None => eo,
            Some(p) => p * eo,
        });
        den = Some(match den {
            None => e1,
            Some(p) => p * e1,
        });
    }
    let (num, den) = (num.expect("sites").trace(), den.expect("sites").trace());
    if den.norm() == 0.0 {
        return Err(Error::NumericalFailure("MPS has zero norm".into()));
    }
    Ok(num / den)
}
