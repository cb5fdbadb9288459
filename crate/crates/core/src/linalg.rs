//! Small dense helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn cmat(rows: usize, cols: usize, entries: &[C64]) -> CMat {
    CMat::from_row_slice(rows, cols, entries)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Pauli matrix by axis index (0 = x, 1 = y, 2 = z).
pub fn pauli(axis: usize) -> CMat {
    match axis {
        0 => cmat(2, 2, &[ZERO, ONE, ONE, ZERO]),
        1 => cmat(2, 2, &[ZERO, -I, I, ZERO]),
        2 => cmat(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli axis {axis}"),
    }
}

/// `n . sigma` for a real 3-vector.
pub fn pauli_dot(n: &[f64; 3]) -> CMat {
    pauli(0) * C64::from(n[0]) + pauli(1) * C64::from(n[1]) + pauli(2) * C64::from(n[2])
}

/// sigma_y (x) sigma_y, which is real.
pub fn yy() -> CMat {
    let y = pauli(1);
    y.kronecker(&y)
}

/// Real spin operators `(S_x, i S_y, S_z)` for local dimension `d`.
///
/// Basis order is m = s, s-1, ..., -s, so index 0 carries the largest S_z.
/// `i S_y` is returned instead of `S_y` because it is real; `S_y (x) S_y`
/// equals `-(iS_y) (x) (iS_y)`.
pub fn spin_real(d: usize) -> (RMat, RMat, RMat) {
    let s = (d as f64 - 1.0) / 2.0;
    let mut sp = RMat::zeros(d, d);
    let mut sz = RMat::zeros(d, d);
    for k in 0..d {
        let m = s - k as f64;
        sz[(k, k)] = m;
        if k > 0 {
            // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
            sp[(k - 1, k)] = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
        }
    }
    let sm = sp.transpose();
    let sx = (&sp + &sm) * 0.5;
    let isy = (&sp - &sm) * 0.5;
    (sx, isy, sz)
}

/// Complex spin operators `[S_x, S_y, S_z]`.
pub fn spin(d: usize) -> [CMat; 3] {
    let (sx, isy, sz) = spin_real(d);
    [to_complex(&sx), to_complex(&isy) * (-I), to_complex(&sz)]
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && (u.adjoint() * u - CMat::identity(u.nrows(), u.ncols())).norm() <= tol
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

pub fn spectral_radius(m: &CMat) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalue of largest modulus (ties broken by larger real part).
pub fn dominant_eigenvalue(m: &CMat) -> C64 {
    let mut best = ZERO;
    for z in eigenvalues(m) {
        if z.norm() > best.norm() + 1e-12 || ((z.norm() - best.norm()).abs() <= 1e-12 && z.re > best.re) {
            best = z;
        }
    }
    best
}

/// Right eigenvector for a known eigenvalue by inverse iteration.
pub fn eigenvector_for(m: &CMat, lambda: C64) -> Option<CVec> {
    let n = m.nrows();
    let shift = lambda + C64::new(1e-10 * lambda.norm().max(1.0), 1e-11);
    let lu = (m - CMat::identity(n, n) * shift).lu();
    let mut v = CVec::from_element(n, ONE).normalize();
    for _ in 0..50 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = w / C64::from(norm);
    }
    let resid = (m * &v - &v * lambda).norm();
    (resid < 1e-6 * lambda.norm().max(1.0)).then_some(v)
}

/// Takagi factorisation of a complex symmetric matrix: returns
/// `(sigma, U)` with `S = U diag(sigma) U^T`, `U` unitary, sigma descending.
pub fn takagi(s: &CMat) -> (Vec<f64>, CMat) {
    let n = s.nrows();
    let mut big = RMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = s[(r, c)];
            big[(r, c)] = z.re;
            big[(r, c + n)] = z.im;
            big[(r + n, c)] = z.im;
            big[(r + n, c + n)] = -z.re;
        }
    }
    let eig = big.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut sigma = Vec::with_capacity(n);
    let mut u = CMat::zeros(n, n);
    for (col, &k) in order.iter().take(n).enumerate() {
        sigma.push(eig.eigenvalues[k].max(0.0));
        let v = eig.eigenvectors.column(k);
        let mut norm = 0.0;
        for r in 0..n {
            let z = C64::new(v[r], v[r + n]);
            norm += z.norm_sqr();
            u[(r, col)] = z;
        }
        let norm = norm.sqrt();
        for r in 0..n {
            u[(r, col)] /= norm;
        }
    }
    // Degenerate singular values can leave non-orthogonal columns; re-orthonormalise.
    let q = u.clone().qr().q();
    let mut fixed = q;
    for col in 0..n {
        let ph = (0..n)
            .map(|r| u[(r, col)] * fixed[(r, col)].conj())
            .fold(ZERO, |a, b| a + b);
        if ph.norm() > 0.0 {
            let p = ph / ph.norm();
            for r in 0..n {
                fixed[(r, col)] *= p;
            }
        }
    }
    (sigma, fixed)
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> CVec {
    let v = CVec::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    v.normalize()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..d {
        let ph = r[(c, c)];
        let ph = if ph.norm() > 0.0 { ph / ph.norm() } else { ONE };
        for row in 0..d {
            q[(row, c)] *= ph;
        }
    }
    q
}

pub fn random_unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-9 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random density matrix of the given rank from a Ginibre construction.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> CMat {
    let g = CMat::from_fn(dim, rank, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spin_commutators() {
        for d in 2..=4 {
            let [sx, sy, sz] = spin(d);
            let comm = &sx * &sy - &sy * &sx;
            assert!(max_abs_diff(&comm, &(&sz * I)) < 1e-12);
            let casimir = &sx * &sx + &sy * &sy + &sz * &sz;
            let s = (d as f64 - 1.0) / 2.0;
            assert!(max_abs_diff(&casimir, &(CMat::identity(d, d) * C64::from(s * (s + 1.0)))) < 1e-12);
        }
        let [_, _, sz] = spin(3);
        assert_eq!(sz[(0, 0)].re, 1.0);
        assert_eq!(sz[(2, 2)].re, -1.0);
    }

    #[test]
    fn takagi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 4] {
            let g = CMat::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let s = &g + g.transpose();
            let (sig, u) = takagi(&s);
            assert!(is_unitary(&u, 1e-10));
            let d = CMat::from_diagonal(&CVec::from_iterator(n, sig.iter().map(|&x| C64::from(x))));
            assert!(max_abs_diff(&(&u * d * u.transpose()), &s) < 1e-10);
        }
    }

    #[test]
    fn inverse_iteration_finds_vector() {
        let m = cmat(2, 2, &[ONE * 2.0, ONE, ONE, ONE * 2.0]);
        let l = dominant_eigenvalue(&m);
        assert!((l - ONE * 3.0).norm() < 1e-10);
        let v = eigenvector_for(&m, l).unwrap();
        assert!((v[0] / v[1] - ONE).norm() < 1e-8);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..5 {
            assert!(is_unitary(&random_unitary(&mut rng, d), 1e-12));
        }
    }
}
