use super::{PureState, SiteDims};
use crate::error::{Error, Result};
use crate::linalg::{RMat, C64};

/// Real symmetric operator stored in compressed sparse rows.
///
/// Every model in this crate has a real Hamiltonian in the S_z basis, so
/// real storage covers all of them.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    dims: SiteDims,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl HermitianOperator {
    pub fn dims(&self) -> &SiteDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn from_dense(dims: SiteDims, m: &RMat) -> Result<Self> {
        let n = dims.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimMismatch(format!("{}x{} matrix for {n} basis states", m.nrows(), m.ncols())));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if m[(r, c)] != 0.0 {
                    cols.push(c);
                    vals.push(m[(r, c)]);
                }
            }
            row_ptr.push(cols.len());
        }
        let op = Self { dims, row_ptr, cols, vals };
        if op.symmetry_defect() > 1e-12 {
            return Err(Error::InvalidSpec("operator is not symmetric".into()));
        }
        Ok(op)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.dim() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, psi: &PureState) -> Vec<C64> {
        let a = psi.amps();
        (0..self.dim())
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| a[self.cols[k]] * self.vals[k]).sum())
            .collect()
    }

    pub fn expectation(&self, psi: &PureState) -> f64 {
        let h = self.apply(psi);
        psi.amps().iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / psi.norm().powi(2)
    }

    pub fn to_dense(&self) -> RMat {
        let n = self.dim();
        let mut m = RMat::zeros(n, n);
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        (self.row_ptr[r]..self.row_ptr[r + 1]).filter(|&k| self.cols[k] == c).map(|k| self.vals[k]).sum()
    }

    /// Largest |H_rc - H_cr|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                worst = worst.max((self.vals[k] - self.entry(c, r)).abs());
            }
        }
        worst
    }

    /// Frobenius norm of `[H, D]` for a diagonal operator `D`.
    pub fn commutator_norm_diag(&self, diag: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.dim() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                acc += (self.vals[k] * (diag[c] - diag[r])).powi(2);
            }
        }
        acc.sqrt()
    }
}

/// Accumulates local terms `op` acting on the tensor product of `sites`.
pub struct OperatorBuilder {
    dims: SiteDims,
    terms: Vec<(Vec<usize>, RMat)>,
}

impl OperatorBuilder {
    pub fn new(dims: SiteDims) -> Self {
        Self { dims, terms: Vec::new() }
    }

    pub fn add(&mut self, sites: &[usize], op: RMat) -> Result<&mut Self> {
        let mut local = 1;
        for (a, &s) in sites.iter().enumerate() {
            if s >= self.dims.n_sites() || sites[..a].contains(&s) {
                return Err(Error::InvalidSpec(format!("bad site list {sites:?}")));
            }
            local *= self.dims.dim(s);
        }
        if op.nrows() != local || op.ncols() != local {
            return Err(Error::DimMismatch(format!("term on {sites:?} needs a {local}x{local} matrix")));
        }
        if op.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coupling".into()));
        }
        self.terms.push((sites.to_vec(), op));
        Ok(self)
    }

    pub fn build(&self) -> HermitianOperator {
        let dims = &self.dims;
        // For every term and every local row, the nonzero local columns.
        let sparse: Vec<Vec<Vec<(usize, f64)>>> = self
            .terms
            .iter()
            .map(|(_, op)| {
                (0..op.nrows())
                    .map(|r| (0..op.ncols()).filter(|&c| op[(r, c)] != 0.0).map(|c| (c, op[(r, c)])).collect())
                    .collect()
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(dims.total() + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut local_digits = Vec::new();
        for r in 0..dims.total() {
            row.clear();
            for ((sites, _), nz) in self.terms.iter().zip(&sparse) {
                local_digits.clear();
                let mut lr = 0;
                for &s in sites {
                    let dg = dims.digit(r, s);
                    local_digits.push(dg);
                    lr = lr * dims.dim(s) + dg;
                }
                for &(lc, v) in &nz[lr] {
                    // decode lc into digits of the term's sites
                    let mut rem = lc;
                    let mut col = r;
                    for (a, &s) in sites.iter().enumerate().rev() {
                        let d = dims.dim(s);
                        let dg = rem % d;
                        rem /= d;
                        col = col + dg * dims.stride(s) - local_digits[a] * dims.stride(s);
                    }
                    row.push((col, v));
                }
            }
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        HermitianOperator { dims: dims.clone(), row_ptr, cols, vals }
    }
}
