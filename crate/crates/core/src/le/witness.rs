use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::hilbert::DensityOperator;
use crate::linalg::{pauli_dot, CMat, C64};

#[derive(Clone, Debug)]
pub struct Witness {
    /// Bloch direction of the projective measurement on the third qubit.
    pub direction: [f64; 3],
    /// `sum_+- p |Q(X/p)| - |Q(rho_12)|` for the returned direction.
    pub gain: f64,
    /// The algebraic construction was not usable and a direct search was run.
    pub fallback: bool,
}

/// `<A (x) B> - <A><B>` on a two-qubit operator (trace `p`, normalized inside).
fn connected(x: &CMat, a: &CMat, b: &CMat) -> f64 {
    let p = x.trace().re;
    let id = CMat::identity(2, 2);
    let ab = (x * a.kronecker(b)).trace().re / p;
    let a1 = (x * a.kronecker(&id)).trace().re / p;
    let b1 = (x * id.kronecker(b)).trace().re / p;
    ab - a1 * b1
}

/// `<n|rho|n>` on the third qubit, unnormalized.
fn conditioned(rho: &CMat, v: [C64; 2]) -> CMat {
    CMat::from_fn(4, 4, |r, c| {
        let mut acc = C64::from(0.0);
        for s in 0..2 {
            for t in 0..2 {
                acc += v[s].conj() * rho[(2 * r + s, 2 * c + t)] * v[t];
            }
        }
        acc
    })
}

/// Measurement vectors of `x . sigma` (eigenvalues +1, -1).
fn bloch_basis(x: [f64; 3]) -> [[C64; 2]; 2] {
    let theta = x[2].clamp(-1.0, 1.0).acos();
    let phi = x[1].atan2(x[0]);
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::from(c), C64::from_polar(s, phi)],
        [-C64::from_polar(s, -phi), C64::from(c)],
    ]
}

fn gain_for(rho: &CMat, a: &CMat, b: &CMat, x: [f64; 3], base: f64) -> f64 {
    let mut g = 0.0;
    for v in bloch_basis(x) {
        let xm = conditioned(rho, v);
        let p = xm.trace().re;
        if p > 1e-14 {
            g += p * connected(&xm, a, b).abs();
        }
    }
    g - base
}

/// Unitary taking `n . sigma` to `sigma_z`.
fn to_z(n: &[f64; 3]) -> CMat {
    let [u, d] = bloch_basis(*n);
    // rows are the +1 and -1 eigenvectors, conjugated
    CMat::from_fn(2, 2, |r, c| if r == 0 { u[c].conj() } else { d[c].conj() })
}

fn sphere_search(rho: &CMat, a: &CMat, b: &CMat, base: f64) -> ([f64; 3], f64) {
    let mut best = ([0.0, 0.0, 1.0], f64::NEG_INFINITY);
    let steps = 60;
    for i in 0..=steps {
        let theta = std::f64::consts::PI * i as f64 / steps as f64;
        for j in 0..2 * steps {
            let phi = std::f64::consts::PI * j as f64 / steps as f64;
            let x = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let g = gain_for(rho, a, b, x, base);
            if g > best.1 {
                best = (x, g);
            }
        }
    }
    best
}

/// Direction for measuring the third qubit of a three-qubit state so that
/// the connected correlation `Q_ab` of the first two does not drop on average.
///
/// After rotating `a` and `b` to `z`, the outcome diagonals are
/// `X_+- = R (1, +-x) / 2` with `R` built from the blocks of `rho` on the
/// third qubit. With `S = R^T (sigma_y (x) sigma_y) R = [[alpha, beta^T], [beta, Q]]`
/// and `p_+- = (1 +- c.x)/2`, any `x` with `x^T (A + B) x >= 0` works, where
/// `A = alpha (c - beta/alpha)(c - beta/alpha)^T` and `B = Q - beta beta^T / alpha`.
pub fn nondecreasing_direction_witness(rho: &DensityOperator, a: [f64; 3], b: [f64; 3]) -> Result<Witness> {
    if rho.dims().dims() != [2, 2, 2] {
        return Err(Error::DimMismatch("witness needs three qubits".into()));
    }
    for v in [a, b] {
        if ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec("directions must be unit vectors".into()));
        }
    }
    let m = rho.matrix();
    let (sa, sb) = (pauli_dot(&a), pauli_dot(&b));
    let full = conditioned(m, [C64::from(1.0), C64::from(0.0)]) + conditioned(m, [C64::from(0.0), C64::from(1.0)]);
    let base = connected(&full, &sa, &sb).abs();

    // rotate so that both observables become sigma_z
    let rot = to_z(&a).kronecker(&to_z(&b)).kronecker(&CMat::identity(2, 2));
    let r3 = &rot * m * rot.adjoint();
    let block = |s: usize, t: usize| CMat::from_fn(4, 4, |r, c| r3[(2 * r + s, 2 * c + t)]);
    let (r1, r2, sg) = (block(0, 0), block(1, 1), block(0, 1));
    let cols = [&r1 + &r2, &r1 - &r2, &sg + sg.adjoint(), (&sg - sg.adjoint()) * C64::i()];
    let rmat = Matrix4::from_fn(|r, c| cols[c][(r, r)].re);
    let y = Matrix4::from_fn(|r, c| crate::linalg::yy()[(r, c)].re);
    let mut s = rmat.transpose() * y * rmat;
    if s[(0, 0)] < 0.0 {
        s = -s;
    }
    let alpha = s[(0, 0)];
    let singular = rmat.determinant().abs() < 1e-12 || alpha < 1e-12;
    let mut direction = None;
    if !singular {
        let beta = Vector3::new(s[(1, 0)], s[(2, 0)], s[(3, 0)]);
        let q = s.fixed_view::<3, 3>(1, 1).into_owned();
        let c = Vector3::new(rmat.column(1).sum(), rmat.column(2).sum(), rmat.column(3).sum());
        let shift = c - beta / alpha;
        let am: Matrix3<f64> = shift * shift.transpose() * alpha;
        let bm: Matrix3<f64> = q - beta * beta.transpose() / alpha;
        let eig = SymmetricEigen::new(am + bm);
        let k = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(k).normalize();
        direction = Some([v[0], v[1], v[2]]);
    }
    // R's columns are diagonals of rho1 + rho2, rho1 - rho2, and the two
    // coherences, so x = (cos theta, sin theta cos phi, sin theta sin phi)
    // in that order: map it to the Bloch vector (x, y, z) = (x2, x3, x1).
    if let Some(x) = direction {
        let bloch = [x[1], x[2], x[0]];
        let g = gain_for(m, &sa, &sb, bloch, base);
        if g >= -1e-9 {
            return Ok(Witness { direction: bloch, gain: g, fallback: false });
        }
    }
    let (bloch, g) = sphere_search(m, &sa, &sb, base);
    Ok(Witness { direction: bloch, gain: g, fallback: true })
}
