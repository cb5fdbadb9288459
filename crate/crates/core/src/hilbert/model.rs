use super::{HermitianOperator, OperatorBuilder, SiteDims};
use crate::error::{Error, Result};
use crate::linalg::{spin_real, RMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// One `gamma * sigma_axis^i sigma_axis^j` entry of a custom coupling table.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    /// 0 = x, 1 = y, 2 = z
    pub axis: usize,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelFamily {
    /// `H = -lambda sum sx sx - sum sz`
    IsingTransverse { lambda: f64 },
    /// `H = -sum (sx sx + sy sy + delta sz sz) - h sum sz`, energies in units of J
    Xxz { delta: f64, h_over_j: f64 },
    /// `H = sum S.S - beta (S.S)^2` on spin-1 sites
    HeisenbergBiquadratic { beta: f64 },
    /// Bilinear-biquadratic chain at beta = -1/3
    Aklt,
    /// `H = -sum gamma sa sa - sum_i field_i sz` on qubits
    Custom { couplings: Vec<Coupling>, fields: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Number of family sites, not counting end caps.
    pub n_sites: usize,
    pub boundary: Boundary,
    /// Attach a spin-1/2 site at each end of a spin-1 chain.
    pub end_spins: bool,
}

impl ModelSpec {
    pub fn new(family: ModelFamily, n_sites: usize, boundary: Boundary) -> Self {
        Self { family, n_sites, boundary, end_spins: false }
    }

    pub fn with_end_spins(mut self) -> Self {
        self.end_spins = true;
        self
    }

    pub fn is_spin_one(&self) -> bool {
        matches!(self.family, ModelFamily::HeisenbergBiquadratic { .. } | ModelFamily::Aklt)
    }

    pub fn total_sites(&self) -> usize {
        self.n_sites + if self.end_spins { 2 } else { 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_sites < 2 {
            return bad(format!("need at least 2 sites, got {}", self.n_sites));
        }
        let finite = match &self.family {
            ModelFamily::IsingTransverse { lambda } => lambda.is_finite(),
            ModelFamily::Xxz { delta, h_over_j } => delta.is_finite() && h_over_j.is_finite(),
            ModelFamily::HeisenbergBiquadratic { beta } => beta.is_finite(),
            ModelFamily::Aklt => true,
            ModelFamily::Custom { couplings, fields } => {
                if !fields.is_empty() && fields.len() != self.n_sites {
                    return bad(format!("{} fields for {} sites", fields.len(), self.n_sites));
                }
                for (k, c) in couplings.iter().enumerate() {
                    if c.i >= self.n_sites || c.j >= self.n_sites || c.i == c.j || c.axis > 2 {
                        return bad(format!("coupling {k} ({}, {}, axis {}) out of range", c.i, c.j, c.axis));
                    }
                }
                couplings.iter().all(|c| c.gamma.is_finite()) && fields.iter().all(|f| f.is_finite())
            }
        };
        if !finite {
            return bad("non-finite model parameter".into());
        }
        if self.end_spins && !self.is_spin_one() {
            return bad("end spins only apply to spin-1 chains".into());
        }
        if self.end_spins && self.boundary == Boundary::Periodic {
            return bad("end spins require an open chain".into());
        }
        Ok(())
    }

    pub fn site_dims(&self) -> Result<SiteDims> {
        self.validate()?;
        if self.is_spin_one() {
            let mut dims = vec![3; self.n_sites];
            if self.end_spins {
                dims.insert(0, 2);
                dims.push(2);
            }
            SiteDims::new(dims)
        } else {
            SiteDims::uniform(2, self.n_sites)
        }
    }

    /// Nearest-neighbour bonds over all sites (caps included); the wrap bond is
    /// added for periodic chains longer than two sites.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.total_sites();
        let mut b: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            b.push((n - 1, 0));
        }
        b
    }
}

fn pauli_real() -> (RMat, RMat, RMat) {
    let (sx, isy, sz) = spin_real(2);
    (sx * 2.0, isy * 2.0, sz * 2.0)
}

/// `S_a . S_b` on the product of local dimensions `da`, `db` (real).
fn exchange(da: usize, db: usize) -> RMat {
    let (xa, ya, za) = spin_real(da);
    let (xb, yb, zb) = spin_real(db);
    xa.kronecker(&xb) - ya.kronecker(&yb) + za.kronecker(&zb)
}

pub fn build_hamiltonian(spec: &ModelSpec) -> Result<HermitianOperator> {
    let dims = spec.site_dims()?;
    let mut b = OperatorBuilder::new(dims.clone());
    let (sx, isy, sz) = pauli_real();
    let xx = sx.kronecker(&sx);
    // sigma_y sigma_y = -(i sigma_y)(i sigma_y)
    let yy = -isy.kronecker(&isy);
    let zz = sz.kronecker(&sz);
    match &spec.family {
        ModelFamily::IsingTransverse { lambda } => {
            for (i, j) in spec.bonds() {
                b.add(&[i, j], &xx * -*lambda)?;
            }
            for i in 0..spec.n_sites {
                b.add(&[i], -&sz)?;
            }
        }
        ModelFamily::Xxz { delta, h_over_j } => {
            for (i, j) in spec.bonds() {
                b.add(&[i, j], -(&xx + &yy + &zz * *delta))?;
            }
            for i in 0..spec.n_sites {
                b.add(&[i], &sz * -*h_over_j)?;
            }
        }
        ModelFamily::HeisenbergBiquadratic { .. } | ModelFamily::Aklt => {
            let beta = match spec.family {
                ModelFamily::HeisenbergBiquadratic { beta } => beta,
                _ => -1.0 / 3.0,
            };
            for (i, j) in spec.bonds() {
                let ss = exchange(dims.dim(i), dims.dim(j));
                let term = &ss - (&ss * &ss) * beta;
                b.add(&[i, j], term)?;
            }
        }
        ModelFamily::Custom { couplings, fields } => {
            let pair = [&xx, &yy, &zz];
            for c in couplings {
                b.add(&[c.i, c.j], pair[c.axis] * -c.gamma)?;
            }
            for (i, f) in fields.iter().enumerate() {
                if *f != 0.0 {
                    b.add(&[i], &sz * -*f)?;
                }
            }
        }
    }
    Ok(b.build())
}

/// Diagonal of `prod_k sigma_z^k` on a qubit chain.
pub fn parity_diagonal(dims: &SiteDims) -> Vec<f64> {
    (0..dims.total())
        .map(|idx| {
            let ones: usize = (0..dims.n_sites()).map(|s| dims.digit(idx, s)).sum();
            if ones % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Diagonal of total S_z.
pub fn total_sz_diagonal(dims: &SiteDims) -> Vec<f64> {
    (0..dims.total())
        .map(|idx| {
            (0..dims.n_sites())
                .map(|s| (dims.dim(s) as f64 - 1.0) / 2.0 - dims.digit(idx, s) as f64)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_eigenvalues(h: &HermitianOperator) -> Vec<f64> {
        let mut e: Vec<f64> = h.to_dense().symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn ising_field_only_limit() {
        let h = build_hamiltonian(&ModelSpec::new(ModelFamily::IsingTransverse { lambda: 0.0 }, 2, Boundary::Open)).unwrap();
        let d = h.to_dense();
        assert_eq!(d[(0, 0)], -2.0);
        assert_eq!(d[(3, 3)], 2.0);
        assert_eq!(d[(1, 1)], 0.0);
        assert_eq!(h.nnz(), 2);
    }

    #[test]
    fn xx_two_sites_by_hand() {
        // -(xx + yy) on two qubits couples |01> and |10> with amplitude -2.
        let spec = ModelSpec::new(ModelFamily::Xxz { delta: 0.0, h_over_j: 0.0 }, 2, Boundary::Periodic);
        let h = build_hamiltonian(&spec).unwrap();
        let d = h.to_dense();
        assert_eq!(d[(1, 2)], -2.0);
        assert_eq!(d[(2, 1)], -2.0);
        assert_eq!(d[(0, 0)], 0.0);
        assert_eq!(dense_eigenvalues(&h), vec![-2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn parity_symmetry() {
        for fam in [
            ModelFamily::IsingTransverse { lambda: 0.7 },
            ModelFamily::Xxz { delta: -1.3, h_over_j: 0.4 },
        ] {
            for bc in [Boundary::Open, Boundary::Periodic] {
                let spec = ModelSpec::new(fam.clone(), 6, bc);
                let h = build_hamiltonian(&spec).unwrap();
                assert!(h.commutator_norm_diag(&parity_diagonal(h.dims())) < 1e-12);
                assert!(h.symmetry_defect() < 1e-14);
            }
        }
    }

    #[test]
    fn aklt_with_caps_conserves_sz() {
        let spec = ModelSpec::new(ModelFamily::Aklt, 3, Boundary::Open).with_end_spins();
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.dims().dims(), &[2, 3, 3, 3, 2]);
        assert!(h.symmetry_defect() < 1e-14);
        assert!(h.commutator_norm_diag(&total_sz_diagonal(h.dims())) < 1e-12);
    }

    #[test]
    fn aklt_bond_is_spin_two_projector() {
        // S.S + (S.S)^2/3 = 2 P_2 - 2/3 on two spin-1 sites
        let spec = ModelSpec::new(ModelFamily::Aklt, 2, Boundary::Open);
        let e = dense_eigenvalues(&build_hamiltonian(&spec).unwrap());
        let low = e.iter().filter(|x| (**x + 2.0 / 3.0).abs() < 1e-12).count();
        let high = e.iter().filter(|x| (**x - 4.0 / 3.0).abs() < 1e-12).count();
        assert_eq!((low, high), (4, 5));
    }

    #[test]
    fn custom_matches_ising() {
        let n = 4;
        let couplings = (0..n - 1).map(|i| Coupling { i, j: i + 1, axis: 0, gamma: 0.8 }).collect();
        let custom = ModelSpec::new(ModelFamily::Custom { couplings, fields: vec![1.0; n] }, n, Boundary::Open);
        let ising = ModelSpec::new(ModelFamily::IsingTransverse { lambda: 0.8 }, n, Boundary::Open);
        let a = build_hamiltonian(&custom).unwrap().to_dense();
        let b = build_hamiltonian(&ising).unwrap().to_dense();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn malformed_specs_rejected() {
        let c = vec![Coupling { i: 0, j: 5, axis: 0, gamma: 1.0 }];
        let spec = ModelSpec::new(ModelFamily::Custom { couplings: c, fields: vec![] }, 3, Boundary::Open);
        assert!(matches!(build_hamiltonian(&spec), Err(Error::InvalidSpec(_))));
        let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda: 1.0 }, 3, Boundary::Open).with_end_spins();
        assert!(build_hamiltonian(&spec).is_err());
        let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda: 1.0 }, 30, Boundary::Open);
        assert!(matches!(build_hamiltonian(&spec), Err(Error::DimensionCap { .. })));
    }
}
