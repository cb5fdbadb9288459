//! States, operators, model Hamiltonians and exact eigensolvers for small chains.
//!
//! Amplitudes use mixed-radix indexing with site 0 as the most significant
//! digit: for dims `[d0, d1, ..., d_{N-1}]` the basis state `|s0 s1 ... s_{N-1}>`
//! lives at index `((s0 * d1 + s1) * d2 + s2) ...`.

mod eigen;
mod model;
mod named;
mod operator;

pub use eigen::{gibbs_state, ground_state, Spectrum, ThermalSpectrum, DENSE_LIMIT};
pub use model::{build_hamiltonian, parity_diagonal, total_sz_diagonal, Boundary, Coupling, ModelFamily, ModelSpec};
pub use named::{build_named_state, NamedState};
pub use operator::{HermitianOperator, OperatorBuilder};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64, ZERO};
use serde_json::{json, Value};

/// Largest number of amplitudes any state may have.
pub const AMPLITUDE_CAP: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteDims {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl SiteDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, AMPLITUDE_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpec("chain has no sites".into()));
        }
        if let Some(k) = dims.iter().position(|&d| d < 2) {
            return Err(Error::InvalidSpec(format!("site {k} has local dimension {} < 2", dims[k])));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = match total.checked_mul(d) {
                Some(t) if t <= cap => t,
                _ => return Err(Error::DimensionCap { requested: usize::MAX.min(total.saturating_mul(d)), cap }),
            };
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(Self { dims, strides, total })
    }

    /// No size cap; `total` and strides saturate. For descriptors of chains
    /// that are never stored densely.
    pub fn unbounded(dims: Vec<usize>) -> Result<Self> {
        let capped = Self::with_cap(dims.clone(), usize::MAX);
        match capped {
            Err(Error::DimensionCap { .. }) => {
                let mut strides = vec![1usize; dims.len()];
                for k in (0..dims.len() - 1).rev() {
                    strides[k] = strides[k + 1].saturating_mul(dims[k + 1]);
                }
                let total = strides[0].saturating_mul(dims[0]);
                Ok(Self { dims, strides, total })
            }
            other => other,
        }
    }

    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(s, st)| s * st).sum()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.dims[site]
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.dims.len() {
            return Err(Error::DimMismatch(format!("site {site} out of range for {} sites", self.dims.len())));
        }
        Ok(())
    }

    /// Split every basis index into (index over `kept` sites, index over the rest).
    pub(crate) fn split(&self, kept: &[usize]) -> Result<(Vec<usize>, Vec<usize>, usize, usize)> {
        for (a, &s) in kept.iter().enumerate() {
            self.check_site(s)?;
            if kept[..a].contains(&s) {
                return Err(Error::DimMismatch(format!("site {s} listed twice")));
            }
        }
        let dk: usize = kept.iter().map(|&s| self.dims[s]).product();
        let rest_sites: Vec<usize> = (0..self.n_sites()).filter(|s| !kept.contains(s)).collect();
        let dr: usize = rest_sites.iter().map(|&s| self.dims[s]).product();
        let mut k_idx = vec![0; self.total];
        let mut r_idx = vec![0; self.total];
        for idx in 0..self.total {
            let mut k = 0;
            for &s in kept {
                k = k * self.dims[s] + self.digit(idx, s);
            }
            let mut r = 0;
            for &s in &rest_sites {
                r = r * self.dims[s] + self.digit(idx, s);
            }
            k_idx[idx] = k;
            r_idx[idx] = r;
        }
        Ok((k_idx, r_idx, dk, dr))
    }
}

/// Apply `op` (d x d) to `site` of every vector stored with stride `col_stride` in `data`.
fn apply_local_slice(dims: &SiteDims, site: usize, op: &CMat, data: &mut [C64]) {
    let d = dims.dim(site);
    let st = dims.stride(site);
    let block = d * st;
    let mut buf = vec![ZERO; d];
    for base in (0..dims.total()).step_by(block) {
        for inner in 0..st {
            let start = base + inner;
            for (m, b) in buf.iter_mut().enumerate() {
                *b = data[start + m * st];
            }
            for r in 0..d {
                let mut acc = ZERO;
                for (c, b) in buf.iter().enumerate() {
                    acc += op[(r, c)] * b;
                }
                data[start + r * st] = acc;
            }
        }
    }
}

/// Anything that can produce local reduced density matrices and product expectations.
pub trait QuantumState {
    fn site_dims(&self) -> &SiteDims;
    /// Reduced density matrix on `sites`, ordered as given.
    fn reduced(&self, sites: &[usize]) -> Result<CMat>;
    /// `<O_{k1} O_{k2} ...>` for operators on distinct sites.
    fn expect_product(&self, ops: &[(usize, CMat)]) -> Result<C64>;
}

fn check_ops(dims: &SiteDims, ops: &[(usize, CMat)]) -> Result<()> {
    for (a, (site, op)) in ops.iter().enumerate() {
        dims.check_site(*site)?;
        if ops[..a].iter().any(|(s, _)| s == site) {
            return Err(Error::DimMismatch(format!("site {site} listed twice")));
        }
        let d = dims.dim(*site);
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimMismatch(format!(
                "operator on site {site} is {}x{}, local dimension {d}",
                op.nrows(),
                op.ncols()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct PureState {
    dims: SiteDims,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(dims: SiteDims, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimMismatch(format!("{} amplitudes for {} basis states", amps.len(), dims.total())));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSpec("non-finite amplitude".into()));
        }
        Ok(Self { dims, amps })
    }

    pub fn from_real(dims: SiteDims, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(dims: SiteDims, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.n_sites() || digits.iter().zip(dims.dims()).any(|(s, d)| s >= d) {
            return Err(Error::DimMismatch("basis label does not match dims".into()));
        }
        let mut amps = vec![ZERO; dims.total()];
        amps[dims.index(digits)] = C64::new(1.0, 0.0);
        Ok(Self { dims, amps })
    }

    pub fn dims(&self) -> &SiteDims {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NumericalFailure("cannot normalize a zero vector".into()));
        }
        for z in &mut self.amps {
            *z /= n;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_vector(&self) -> CVec {
        CVec::from_column_slice(&self.amps)
    }

    pub fn apply_local(&mut self, site: usize, op: &CMat) -> Result<()> {
        check_ops(&self.dims, &[(site, op.clone())])?;
        apply_local_slice(&self.dims, site, op, &mut self.amps);
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dims": self.dims.dims(),
            "amps": self.amps.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let parse = |field: &str, msg: &str| Error::Parse { field: field.into(), msg: msg.into() };
        let dims = v
            .get("dims")
            .and_then(Value::as_array)
            .ok_or_else(|| parse("dims", "expected an array of integers"))?;
        let dims: Vec<usize> = dims
            .iter()
            .enumerate()
            .map(|(k, x)| x.as_u64().map(|d| d as usize).ok_or_else(|| parse(&format!("dims[{k}]"), "expected an integer")))
            .collect::<Result<_>>()?;
        let dims = SiteDims::new(dims)?;
        let amps = v
            .get("amps")
            .and_then(Value::as_array)
            .ok_or_else(|| parse("amps", "expected an array of [re, im] pairs"))?;
        let amps = amps
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let pair = z.as_array().filter(|p| p.len() == 2);
                match pair.map(|p| (p[0].as_f64(), p[1].as_f64())) {
                    Some((Some(re), Some(im))) => Ok(C64::new(re, im)),
                    _ => Err(parse(&format!("amps[{k}]"), "expected [re, im]")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, amps)
    }
}

impl QuantumState for PureState {
    fn site_dims(&self) -> &SiteDims {
        &self.dims
    }

    fn reduced(&self, sites: &[usize]) -> Result<CMat> {
        let (k_idx, r_idx, dk, dr) = self.dims.split(sites)?;
        let mut m = CMat::zeros(dk, dr);
        for (idx, z) in self.amps.iter().enumerate() {
            m[(k_idx[idx], r_idx[idx])] = *z;
        }
        let rho = &m * m.adjoint();
        let tr = rho.trace().re;
        Ok(rho / C64::from(tr))
    }

    fn expect_product(&self, ops: &[(usize, CMat)]) -> Result<C64> {
        check_ops(&self.dims, ops)?;
        let mut phi = self.amps.clone();
        for (site, op) in ops {
            apply_local_slice(&self.dims, *site, op, &mut phi);
        }
        let num: C64 = self.amps.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        Ok(num / self.norm().powi(2))
    }
}

#[derive(Clone, Debug)]
pub struct DensityOperator {
    dims: SiteDims,
    mat: CMat,
}

impl DensityOperator {
    /// Wrap a matrix, checking hermiticity, trace and positivity.
    pub fn new(dims: SiteDims, mat: CMat) -> Result<Self> {
        let rho = Self::new_unchecked(dims, mat)?;
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(dims: SiteDims, mat: CMat) -> Result<Self> {
        if mat.nrows() != dims.total() || mat.ncols() != dims.total() {
            return Err(Error::DimMismatch(format!("{}x{} matrix for {} basis states", mat.nrows(), mat.ncols(), dims.total())));
        }
        Ok(Self { dims, mat })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (&self.mat - self.mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::NumericalFailure(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::NumericalFailure(format!("trace {tr} != 1")));
        }
        let min = self.mat.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::NumericalFailure(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.to_vector() / C64::from(psi.norm());
        Self { dims: psi.dims.clone(), mat: &v * v.adjoint() }
    }

    pub fn maximally_mixed(dims: SiteDims) -> Self {
        let n = dims.total();
        Self { dims, mat: CMat::identity(n, n) / C64::from(n as f64) }
    }

    pub fn dims(&self) -> &SiteDims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn fidelity_with_pure(&self, psi: &PureState) -> f64 {
        let v = psi.to_vector();
        (v.adjoint() * &self.mat * &v)[(0, 0)].re / psi.norm().powi(2)
    }
}

impl QuantumState for DensityOperator {
    fn site_dims(&self) -> &SiteDims {
        &self.dims
    }

    fn reduced(&self, sites: &[usize]) -> Result<CMat> {
        let (k_idx, r_idx, dk, dr) = self.dims.split(sites)?;
        let mut groups = vec![Vec::with_capacity(dk); dr];
        for idx in 0..self.dims.total() {
            groups[r_idx[idx]].push(idx);
        }
        let mut red = CMat::zeros(dk, dk);
        for g in &groups {
            for &a in g {
                for &b in g {
                    red[(k_idx[a], k_idx[b])] += self.mat[(a, b)];
                }
            }
        }
        Ok(red)
    }

    fn expect_product(&self, ops: &[(usize, CMat)]) -> Result<C64> {
        check_ops(&self.dims, ops)?;
        // tr(rho O) = sum over columns of (O rho)_{kk}
        let n = self.dims.total();
        let mut acc = ZERO;
        let mut col = vec![ZERO; n];
        for c in 0..n {
            col.copy_from_slice(self.mat.column(c).as_slice());
            for (site, op) in ops {
                apply_local_slice(&self.dims, *site, op, &mut col);
            }
            acc += col[c];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn indexing_round_trips_exhaustively() {
        for dims in [vec![2; 12], vec![3, 2, 3, 2, 3], vec![2, 3, 3, 3, 2]] {
            let sd = SiteDims::new(dims).unwrap();
            for idx in 0..sd.total() {
                assert_eq!(sd.index(&sd.digits(idx)), idx);
            }
        }
    }

    #[test]
    fn site_zero_is_most_significant() {
        let sd = SiteDims::new(vec![2, 3]).unwrap();
        assert_eq!(sd.index(&[1, 0]), 3);
        assert_eq!(sd.digits(5), vec![1, 2]);
    }

    #[test]
    fn cap_and_small_dims_rejected() {
        assert!(matches!(SiteDims::with_cap(vec![2; 10], 512), Err(Error::DimensionCap { .. })));
        assert!(matches!(SiteDims::new(vec![2, 1]), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn reduced_density_pure_vs_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sd = SiteDims::new(vec![2, 3, 2, 2]).unwrap();
        let v = random_state(&mut rng, sd.total());
        let psi = PureState::new(sd, v.iter().copied().collect()).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        for sites in [vec![0, 1], vec![3, 1], vec![2]] {
            let a = psi.reduced(&sites).unwrap();
            let b = rho.reduced(&sites).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
        let ops = vec![(0, pauli(2)), (3, pauli(0))];
        let e1 = psi.expect_product(&ops).unwrap();
        let e2 = rho.expect_product(&ops).unwrap();
        assert!((e1 - e2).norm() < 1e-12);
        let r = psi.reduced(&[0, 3]).unwrap();
        let e3 = (r * pauli(2).kronecker(&pauli(0))).trace();
        assert!((e1 - e3).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let sd = SiteDims::new(vec![2, 2]).unwrap();
        let psi = PureState::new(sd, vec![C64::new(0.5, 0.1), ZERO, C64::new(-0.3, 0.0), C64::new(0.0, 0.2)]).unwrap();
        let back = PureState::from_json(&psi.to_json()).unwrap();
        assert_eq!(back.amps(), psi.amps());
        let bad = serde_json::json!({"dims": [2, 2], "amps": [[1.0, 0.0], [0.0], [0.0, 0.0], [0.0, 0.0]]});
        match PureState::from_json(&bad) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "amps[1]"),
            other => panic!("{other:?}"),
        }
    }
}
