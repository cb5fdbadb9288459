use super::{DensityOperator, HermitianOperator, PureState, SiteDims};
use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense diagonalization is used at or below this many basis states.
pub const DENSE_LIMIT: usize = 1024;
/// Largest space for full spectra (Gibbs states).
pub const THERMAL_LIMIT: usize = 4096;

const RESIDUAL_TOL: f64 = 1e-9;
const KRYLOV_MAX: usize = 120;
const MAX_RESTARTS: usize = 60;

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub states: Vec<PureState>,
    pub degeneracy_tol: f64,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_multiplicity(&self) -> usize {
        let e0 = self.energies[0];
        self.energies.iter().take_while(|e| **e - e0 <= self.degeneracy_tol).count()
    }

    pub fn is_degenerate(&self) -> bool {
        self.ground_multiplicity() > 1
    }

    pub fn ground_block(&self) -> &[PureState] {
        &self.states[..self.ground_multiplicity()]
    }

    /// Deterministic pure representative of the ground block: the projection of
    /// the lowest-index basis vector with nonzero weight in the block, with a
    /// positive amplitude at that index.
    pub fn canonical_ground_state(&self) -> PureState {
        let block = self.ground_block();
        if block.len() == 1 {
            let mut psi = block[0].clone();
            let lead = psi.amps().iter().position(|z| z.norm() > 1e-12).unwrap_or(0);
            let ph = psi.amps()[lead];
            let ph = ph.conj() / ph.norm();
            psi.amps_mut().iter_mut().for_each(|z| *z *= ph);
            return psi;
        }
        let n = block[0].amps().len();
        let idx = (0..n)
            .find(|&m| block.iter().map(|v| v.amps()[m].norm_sqr()).sum::<f64>() > 1e-12)
            .unwrap_or(0);
        let mut amps = vec![C64::new(0.0, 0.0); n];
        for v in block {
            let w = v.amps()[idx].conj();
            for (a, z) in amps.iter_mut().zip(v.amps()) {
                *a += z * w;
            }
        }
        PureState::new(block[0].dims().clone(), amps).and_then(PureState::normalized).expect("nonzero projection")
    }

    /// Equal mixture over the ground block.
    pub fn ground_mixture(&self) -> Result<DensityOperator> {
        let block = self.ground_block();
        let dims = block[0].dims().clone();
        if dims.total() > THERMAL_LIMIT {
            return Err(Error::DimensionCap { requested: dims.total(), cap: THERMAL_LIMIT });
        }
        let mut m = CMat::zeros(dims.total(), dims.total());
        for v in block {
            let x = v.to_vector();
            m += &x * x.adjoint();
        }
        DensityOperator::new_unchecked(dims, m / C64::from(block.len() as f64))
    }
}

fn to_state(dims: &SiteDims, v: &[f64]) -> PureState {
    PureState::from_real(dims.clone(), v).expect("eigenvector length")
}

fn dense_spectrum(h: &HermitianOperator) -> (Vec<f64>, RMat) {
    let eig = h.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = RMat::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    (energies, vecs)
}

/// Lowest `k` eigenpairs, extended until the ground block is closed.
pub fn ground_state(h: &HermitianOperator, k: usize, degeneracy_tol: f64) -> Result<Spectrum> {
    let n = h.dim();
    let k = k.clamp(1, n);
    let dims = h.dims();
    if n <= DENSE_LIMIT {
        let (energies, vecs) = dense_spectrum(h);
        let mut take = k;
        while take < n && energies[take] - energies[0] <= degeneracy_tol {
            take += 1;
        }
        let states = (0..take).map(|c| to_state(dims, vecs.column(c).as_slice())).collect();
        return Ok(Spectrum { energies: energies[..take].to_vec(), states, degeneracy_tol });
    }
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut energies = Vec::new();
    loop {
        let (e, v) = lanczos_lowest(h, &found, found.len() as u64)?;
        energies.push(e);
        found.push(v);
        let done = found.len() >= k && (e - energies[0] > degeneracy_tol || found.len() == n);
        if done {
            break;
        }
    }
    // Deflation can return pairs slightly out of order inside near-degenerate blocks.
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let states = order.iter().map(|&i| to_state(dims, &found[i])).collect();
    let energies = order.iter().map(|&i| energies[i]).collect();
    Ok(Spectrum { energies, states, degeneracy_tol })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(q, w);
            axpy(w, -c, q);
        }
    }
}

/// Lowest eigenpair of `h` restricted to the complement of `deflate`.
fn lanczos_lowest(h: &HermitianOperator, deflate: &[Vec<f64>], seed: u64) -> Result<(f64, Vec<f64>)> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_0500 ^ seed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    orthogonalize(&mut v0, deflate);
    let nv = dot(&v0, &v0).sqrt();
    v0.iter_mut().for_each(|x| *x /= nv);
    let krylov = KRYLOV_MAX.min(n - deflate.len());
    let mut last_resid = f64::INFINITY;
    let mut w = vec![0.0; n];
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let m = basis.len() - 1;
            h.matvec(&basis[m], &mut w);
            let a = dot(&basis[m], &w);
            alpha.push(a);
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let b = dot(&w, &w).sqrt();
            if basis.len() >= krylov || b < 1e-12 {
                break;
            }
            if basis.len() % 10 == 0 {
                let (theta, y) = tridiag_lowest(&alpha, &beta);
                let _ = theta;
                if (b * y[y.len() - 1]).abs() < RESIDUAL_TOL * 0.01 {
                    break;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let (_, y) = tridiag_lowest(&alpha, &beta);
        let mut x = vec![0.0; n];
        for (q, c) in basis.iter().zip(y.iter()) {
            axpy(&mut x, *c, q);
        }
        orthogonalize(&mut x, deflate);
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|e| *e /= nx);
        h.matvec(&x, &mut w);
        let e = dot(&x, &w);
        axpy(&mut w, -e, &x);
        last_resid = dot(&w, &w).sqrt();
        if last_resid < RESIDUAL_TOL {
            return Ok((e, x));
        }
        v0 = x;
    }
    Err(Error::ConvergenceFailure { residual: last_resid })
}

fn tridiag_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = RMat::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let k = (0..m).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
}

/// Full spectrum kept for repeated thermal evaluations.
#[derive(Clone, Debug)]
pub struct ThermalSpectrum {
    dims: SiteDims,
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, ordered like `energies`.
    pub vectors: RMat,
}

impl ThermalSpectrum {
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        if h.dim() > THERMAL_LIMIT {
            return Err(Error::DimensionCap { requested: h.dim(), cap: THERMAL_LIMIT });
        }
        let (energies, vectors) = dense_spectrum(h);
        Ok(Self { dims: h.dims().clone(), energies, vectors })
    }

    pub fn dims(&self) -> &SiteDims {
        &self.dims
    }

    /// Normalized Boltzmann weights at temperature `t`.
    pub fn weights(&self, t: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::OutOfRange(format!("temperature {t} must be positive")));
        }
        let e0 = self.energies[0];
        let w: Vec<f64> = self.energies.iter().map(|e| (-(e - e0) / t).exp()).collect();
        let z: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / z).collect())
    }

    pub fn state(&self, k: usize) -> PureState {
        to_state(&self.dims, self.vectors.column(k).as_slice())
    }

    pub fn density(&self, t: f64) -> Result<DensityOperator> {
        let w = self.weights(t)?;
        let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 1e-18).collect();
        let n = self.dims.total();
        let v = RMat::from_fn(n, keep.len(), |r, c| self.vectors[(r, keep[c])] * w[keep[c]].sqrt());
        let rho = &v * v.transpose();
        DensityOperator::new_unchecked(self.dims.clone(), rho.map(|x| C64::new(x, 0.0)))
    }
}

/// `exp(-H/T)/Z` by dense diagonalization.
pub fn gibbs_state(h: &HermitianOperator, t: f64) -> Result<DensityOperator> {
    ThermalSpectrum::new(h)?.density(t)
}
