//! Bipartite entanglement measures for two-site states.
//!
//! All logarithms are base 2. Negativity is the sum of the moduli of the
//! negative eigenvalues of the partial transpose, so a Bell pair has 1/2.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

type Mat<T> = DMatrix<Complex<T>>;
type Vector<T> = DVector<Complex<T>>;

#[derive(Clone, Debug)]
pub enum TwoSiteState<T: Scalar> {
    Pure { amps: Vector<T>, da: usize, db: usize },
    Mixed { rho: Mat<T>, da: usize, db: usize },
}

impl<T: Scalar> TwoSiteState<T> {
    /// Pure state with amplitude index `a * db + b`; must be normalized.
    pub fn pure(amps: Vector<T>, da: usize, db: usize) -> Result<Self> {
        if amps.len() != da * db {
            return Err(Error::DimMismatch(format!("{} amplitudes for {da}x{db}", amps.len())));
        }
        let n = amps.norm();
        if (n - T::one()).abs() > T::tolerance() {
            return Err(Error::NumericalFailure(format!("state norm {n} != 1")));
        }
        Ok(Self::Pure { amps, da, db })
    }

    pub fn mixed(rho: Mat<T>, da: usize, db: usize) -> Result<Self> {
        if rho.nrows() != da * db || rho.ncols() != da * db {
            return Err(Error::DimMismatch(format!("{}x{} matrix for {da}x{db}", rho.nrows(), rho.ncols())));
        }
        let tr = rho.trace();
        if (tr.re - T::one()).abs() > T::tolerance() || tr.im.abs() > T::tolerance() {
            return Err(Error::NumericalFailure(format!("trace {tr} != 1")));
        }
        Ok(Self::Mixed { rho, da, db })
    }

    pub fn local_dims(&self) -> (usize, usize) {
        match self {
            Self::Pure { da, db, .. } | Self::Mixed { da, db, .. } => (*da, *db),
        }
    }

    pub fn density(&self) -> Mat<T> {
        match self {
            Self::Pure { amps, .. } => amps * amps.adjoint(),
            Self::Mixed { rho, .. } => rho.clone(),
        }
    }

    fn require_pure(&self) -> Result<(&Vector<T>, usize, usize)> {
        match self {
            Self::Pure { amps, da, db } => Ok((amps, *da, *db)),
            Self::Mixed { .. } => Err(Error::MeasureMismatch { measure: "pure-state measure".into(), member: "mixed".into() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SchmidtDecomp<T: Scalar> {
    /// Nonincreasing Schmidt coefficients.
    pub coeffs: Vec<T>,
    /// Left vectors as columns.
    pub left: Mat<T>,
    /// Right vectors as columns; `psi = sum_k c_k left_k (x) right_k`.
    pub right: Mat<T>,
}

fn amp_matrix<T: Scalar>(amps: &Vector<T>, da: usize, db: usize) -> Mat<T> {
    Mat::from_fn(da, db, |a, b| amps[a * db + b])
}

pub fn schmidt<T: Scalar>(psi: &TwoSiteState<T>) -> Result<SchmidtDecomp<T>> {
    let (amps, da, db) = psi.require_pure()?;
    let svd = amp_matrix(amps, da, db).svd(true, true);
    let k = da.min(db);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let coeffs = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = Mat::from_fn(da, k, |r, c| u[(r, order[c])]);
    let right = Mat::from_fn(db, k, |r, c| vt[(order[c], r)]);
    Ok(SchmidtDecomp { coeffs, left, right })
}

/// `|<psi*| sigma_y (x) sigma_y |psi>| = 2 |psi00 psi11 - psi01 psi10|`.
pub fn concurrence_pure<T: Scalar>(psi: &TwoSiteState<T>) -> Result<T> {
    let (a, da, db) = psi.require_pure()?;
    if (da, db) != (2, 2) {
        return Err(Error::DimMismatch(format!("concurrence needs qubits, got {da}x{db}")));
    }
    let det = a[0] * a[3] - a[1] * a[2];
    Ok((det.modulus() * T::of(2.0)).min(T::one()))
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy<T: Scalar>(x: T) -> T {
    let h = |p: T| if p <= T::zero() { T::zero() } else { -p * p.log2() };
    h(x) + h(T::one() - x)
}

pub fn entropy_of_entanglement<T: Scalar>(psi: &TwoSiteState<T>) -> Result<T> {
    let s = schmidt(psi)?;
    let clip = T::of(1e-15);
    let mut e = T::zero();
    for c in s.coeffs {
        let p = c * c;
        if p > clip {
            e -= p * p.log2();
        }
    }
    Ok(e.max(T::zero()))
}

/// `f(C) = H((1 + sqrt(1 - C^2)) / 2)`.
pub fn f_of_c<T: Scalar>(c: T) -> Result<T> {
    if !(c >= -T::tolerance() && c <= T::one() + T::tolerance()) {
        return Err(Error::OutOfRange(format!("concurrence {c} outside [0, 1]")));
    }
    let c = c.max(T::zero()).min(T::one());
    let x = (T::one() + (T::one() - c * c).sqrt()) / T::of(2.0);
    Ok(binary_entropy(x))
}

pub fn partial_transpose<T: Scalar>(rho: &Mat<T>, da: usize, db: usize) -> Mat<T> {
    Mat::from_fn(da * db, da * db, |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        rho[(a * db + b2, a2 * db + b)]
    })
}

pub fn negativity<T: Scalar>(state: &TwoSiteState<T>) -> Result<T> {
    match state {
        TwoSiteState::Pure { .. } => {
            let s = schmidt(state)?;
            let sum = s.coeffs.iter().fold(T::zero(), |a, &b| a + b);
            Ok(((sum * sum - T::one()) / T::of(2.0)).max(T::zero()))
        }
        TwoSiteState::Mixed { rho, da, db } => {
            let pt = partial_transpose(rho, *da, *db);
            let ev = pt.symmetric_eigenvalues();
            Ok(ev.iter().filter(|&&x| x < T::zero()).fold(T::zero(), |a, &x| a - x))
        }
    }
}

fn yy<T: Scalar>() -> Mat<T> {
    let z = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut m = Mat::from_element(4, 4, z);
    m[(0, 3)] = -one;
    m[(1, 2)] = one;
    m[(2, 1)] = one;
    m[(3, 0)] = -one;
    m
}

/// Eigen square root `X = V sqrt(Lambda)` with `X X^dagger = rho`.
fn eigen_root<T: Scalar>(rho: &Mat<T>) -> Result<Mat<T>> {
    let eig = rho.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(T::one(), |a, b| a.min(b));
    if min < -T::tolerance() {
        return Err(Error::NumericalFailure(format!("density operator has eigenvalue {min}")));
    }
    let n = rho.nrows();
    Ok(Mat::from_fn(n, n, |r, c| {
        eig.eigenvectors[(r, c)] * Complex::new(eig.eigenvalues[c].max(T::zero()).sqrt(), T::zero())
    }))
}

/// Sum of singular values of `X^T (sigma_y (x) sigma_y) X` for a square root `X` of `rho`.
pub fn entanglement_of_assistance<T: Scalar>(state: &TwoSiteState<T>) -> Result<T> {
    if state.local_dims() != (2, 2) {
        return Err(Error::DimMismatch("entanglement of assistance is for qubit pairs".into()));
    }
    let x = eigen_root(&state.density())?;
    Ok(eoa_with_root(&x))
}

pub(crate) fn eoa_with_root<T: Scalar>(x: &Mat<T>) -> T {
    let m = x.transpose() * yy::<T>() * x;
    m.singular_values().iter().fold(T::zero(), |a, &b| a + b)
}

/// Wootters concurrence of a two-qubit density operator.
pub fn concurrence<T: Scalar>(state: &TwoSiteState<T>) -> Result<T> {
    if state.local_dims() != (2, 2) {
        return Err(Error::DimMismatch("concurrence is for qubit pairs".into()));
    }
    if let TwoSiteState::Pure { .. } = state {
        return concurrence_pure(state);
    }
    let rho = state.density();
    // lambda_i are the singular values of X^T Y X for X = sqrt(rho) eigen-root
    let x = eigen_root(&rho)?;
    let m = x.transpose() * yy::<T>() * &x;
    let mut sv: Vec<T> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((sv[0] - sv[1] - sv[2] - sv[3]).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_density, random_state, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn pure(v: &[f64], da: usize, db: usize) -> TwoSiteState<f64> {
        TwoSiteState::pure(DVector::from_iterator(v.len(), v.iter().map(|&x| C::new(x, 0.0))), da, db).unwrap()
    }

    fn mixed(rho: DMatrix<C>) -> TwoSiteState<f64> {
        TwoSiteState::mixed(rho, 2, 2).unwrap()
    }

    fn bell() -> TwoSiteState<f64> {
        let h = 0.5f64.sqrt();
        pure(&[0.0, h, h, 0.0], 2, 2)
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence_pure(&bell()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(concurrence_pure(&pure(&[1.0, 0.0, 0.0, 0.0], 2, 2)).unwrap(), 0.0);
        let s = pure(&[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()], 2, 2);
        assert!((concurrence_pure(&s).unwrap() - 0.6).abs() < 1e-15);
        assert!(matches!(concurrence_pure(&pure(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 2, 3)), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy_of_entanglement(&bell()).unwrap() - 1.0).abs() < 1e-12);
        let t = 3f64.sqrt().recip();
        let q = pure(&[t, 0.0, 0.0, 0.0, t, 0.0, 0.0, 0.0, t], 3, 3);
        assert!((entropy_of_entanglement(&q).unwrap() - 3f64.log2()).abs() < 1e-12);
        let s = pure(&[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()], 2, 2);
        let h09 = -(0.9 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((entropy_of_entanglement(&s).unwrap() - h09).abs() < 1e-12);
        assert!((h09 - 0.4690).abs() < 1e-4);
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_of_c(0.0).unwrap(), 0.0);
        assert!((f_of_c(1.0).unwrap() - 1.0).abs() < 1e-15);
        let h09 = -(0.9 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((f_of_c(0.6).unwrap() - h09).abs() < 1e-12);
        assert!(matches!(f_of_c(1.5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn f_monotone_and_convex() {
        let xs: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f_of_c(x).unwrap()).collect();
        for k in 1..fs.len() {
            assert!(fs[k] >= fs[k - 1]);
        }
        for k in 1..fs.len() - 1 {
            assert!(fs[k - 1] + fs[k + 1] - 2.0 * fs[k] >= -1e-12);
        }
    }

    #[test]
    fn negativity_examples() {
        let b = bell().density();
        assert!((negativity(&mixed(b.clone())).unwrap() - 0.5).abs() < 1e-12);
        assert!((negativity(&bell()).unwrap() - 0.5).abs() < 1e-12);
        let id = DMatrix::<C>::identity(4, 4) * C::new(0.25, 0.0);
        assert!(negativity(&mixed(id.clone())).unwrap().abs() < 1e-12);
        let werner = b * C::new(0.5, 0.0) + id * C::new(0.5, 0.0);
        assert!((negativity(&mixed(werner)).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn eoa_examples() {
        assert!((entanglement_of_assistance(&mixed(bell().density())).unwrap() - 1.0).abs() < 1e-12);
        let id = DMatrix::<C>::identity(4, 4) * C::new(0.25, 0.0);
        assert!((entanglement_of_assistance(&mixed(id)).unwrap() - 1.0).abs() < 1e-12);
        let mut p = DMatrix::<C>::zeros(4, 4);
        p[(0, 0)] = C::new(1.0, 0.0);
        assert!(entanglement_of_assistance(&mixed(p)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn identity_is_mixture_of_four_bell_states() {
        let h = 0.5f64.sqrt();
        let bells = [[h, 0.0, 0.0, h], [h, 0.0, 0.0, -h], [0.0, h, h, 0.0], [0.0, h, -h, 0.0]];
        let mut sum = DMatrix::<C>::zeros(4, 4);
        let mut avg_c = 0.0;
        for b in bells {
            let s = pure(&b, 2, 2);
            sum += s.density() * C::new(0.25, 0.0);
            avg_c += 0.25 * concurrence_pure(&s).unwrap();
        }
        assert!((sum - DMatrix::<C>::identity(4, 4) * C::new(0.25, 0.0)).norm() < 1e-15);
        assert!((avg_c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&pure(&[1.0, 0.0, 0.0, 0.0], 2, 2)).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-15 && s.coeffs[1].abs() < 1e-15);
        let s = schmidt(&bell()).unwrap();
        assert!(s.coeffs.iter().all(|c| (c - 0.5f64.sqrt()).abs() < 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = random_state(&mut rng, 9);
        let st = TwoSiteState::pure(v.clone(), 3, 3).unwrap();
        let s = schmidt(&st).unwrap();
        assert!((s.coeffs.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.coeffs.windows(2).all(|w| w[0] >= w[1]));
        let mut rec = DVector::<C>::zeros(9);
        for k in 0..3 {
            rec += s.left.column(k).kronecker(&s.right.column(k)) * C::new(s.coeffs[k], 0.0);
        }
        assert!((rec - v).norm() < 1e-10);
    }

    #[test]
    fn wootters_matches_pure_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let v = random_state(&mut rng, 4);
            let p = TwoSiteState::pure(v.clone(), 2, 2).unwrap();
            let c = concurrence_pure(&p).unwrap();
            let m = mixed(&v * v.adjoint());
            assert!((concurrence(&m).unwrap() - c).abs() < 1e-8);
            let rho = random_density(&mut rng, 4, 2);
            let st = mixed(rho);
            assert!(concurrence(&st).unwrap() <= entanglement_of_assistance(&st).unwrap() + 1e-9);
        }
        let sep = DMatrix::<C>::from_diagonal(&DVector::from_vec(vec![C::new(0.5, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.5, 0.0)]));
        assert!(concurrence(&mixed(sep)).unwrap() < 1e-12);
    }

    #[test]
    fn local_unitaries_leave_measures_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let v = random_state(&mut rng, 9);
            let u = random_unitary(&mut rng, 3).kronecker(&random_unitary(&mut rng, 3));
            let a = TwoSiteState::pure(v.clone(), 3, 3).unwrap();
            let b = TwoSiteState::pure(u * v, 3, 3).unwrap();
            assert!((entropy_of_entanglement(&a).unwrap() - entropy_of_entanglement(&b).unwrap()).abs() < 1e-10);
            assert!((negativity(&a).unwrap() - negativity(&b).unwrap()).abs() < 1e-10);
            let ma = TwoSiteState::mixed(a.density(), 3, 3).unwrap();
            assert!((negativity(&ma).unwrap() - negativity(&a).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn single_precision_kernels() {
        let h = 0.5f32.sqrt();
        let amps = DVector::from_vec(vec![Complex::new(0.0f32, 0.0), Complex::new(h, 0.0), Complex::new(h, 0.0), Complex::new(0.0, 0.0)]);
        let b = TwoSiteState::pure(amps, 2, 2).unwrap();
        assert!((concurrence_pure(&b).unwrap() - 1.0).abs() < f32::tolerance());
        assert!((entropy_of_entanglement(&b).unwrap() - 1.0).abs() < f32::tolerance());
        assert!((negativity(&TwoSiteState::mixed(b.density(), 2, 2).unwrap()).unwrap() - 0.5).abs() < f32::tolerance());
        assert!((entanglement_of_assistance(&b).unwrap() - 1.0).abs() < f32::tolerance());
        assert!((f_of_c(0.6f32).unwrap() - 0.4690).abs() < 1e-3);
    }
}
