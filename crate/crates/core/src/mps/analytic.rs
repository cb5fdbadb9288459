//! Closed forms for qubit-bond (D = 2) MPS with qubit end sites.

use super::{transfer_of, MatrixProductState, MpsBoundary};
use crate::error::{Error, Result};
use crate::le::MeasurementStrategy;
use crate::linalg::{eigenvalues, eigenvector_for, pauli, takagi, yy, CMat, C64};

fn det2(m: &CMat) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

fn require_qubit_bond(mps: &MatrixProductState) -> Result<()> {
    if mps.bond_dim() != 2 {
        return Err(Error::WrongBondDim { expected: 2, found: mps.bond_dim() });
    }
    Ok(())
}

/// `sum_o |det B^o|` with `B^o = sum_s conj(U[s,o]) A^s`.
pub fn sum_abs_det(mats: &[CMat], u: &CMat) -> f64 {
    let d = mats.len();
    (0..d)
        .map(|o| det2(&(0..d).fold(CMat::zeros(2, 2), |acc, s| acc + &mats[s] * u[(s, o)].conj())).norm())
        .sum()
}

/// `S = A Y A^T`, with `A` the d x 4 matrix of row-major vectorized tensors.
fn det_form(mats: &[CMat]) -> CMat {
    let d = mats.len();
    let a = CMat::from_fn(d, 4, |s, k| mats[s][(k / 2, k % 2)]);
    &a * yy() * a.transpose()
}

/// Largest `sum_o |det B^o|` over measurement bases: half the trace norm of
/// `A (sigma_y (x) sigma_y) A^T`.
pub fn e_a(mats: &[CMat]) -> Result<f64> {
    if mats[0].nrows() != 2 {
        return Err(Error::WrongBondDim { expected: 2, found: mats[0].nrows() });
    }
    Ok(0.5 * det_form(mats).singular_values().iter().sum::<f64>())
}

/// The basis attaining `e_a`, from the Takagi vectors of `A Y A^T`.
pub fn optimal_basis_qubit_bond(mats: &[CMat]) -> Result<(f64, CMat)> {
    let value = e_a(mats)?;
    let (_, u) = takagi(&det_form(mats));
    Ok((value, u))
}

struct Ends {
    amat_det: f64,
    bmat_det: f64,
    e_a1: CMat,
    e_b1: CMat,
    e_az: CMat,
    e_bz: CMat,
}

fn qubit_ends(mps: &MatrixProductState) -> Result<Ends> {
    require_qubit_bond(mps)?;
    let (left, right) = match mps.boundary() {
        MpsBoundary::Open { left, right } if left.len() == 2 && right.len() == 2 => (left, right),
        _ => return Err(Error::DimMismatch("closed form needs an open chain with qubit end sites".into())),
    };
    let a_rows: Vec<CMat> = left.iter().map(|v| CMat::from_row_slice(1, 2, v.as_slice())).collect();
    let b_cols: Vec<CMat> = right.iter().map(|v| CMat::from_column_slice(2, 1, v.as_slice())).collect();
    let amat = CMat::from_fn(2, 2, |r, c| left[r][c]);
    let bmat = CMat::from_fn(2, 2, |r, c| right[c][r]);
    let id = CMat::identity(2, 2);
    Ok(Ends {
        amat_det: det2(&amat).norm(),
        bmat_det: det2(&bmat).norm(),
        e_a1: transfer_of(&a_rows, &id)?,
        e_b1: transfer_of(&b_cols, &id)?,
        e_az: transfer_of(&a_rows, &pauli(2))?,
        e_bz: transfer_of(&b_cols, &pauli(2))?,
    })
}

fn norm_contraction(mps: &MatrixProductState, n: usize, ends: &Ends) -> Result<f64> {
    let id = CMat::identity(mps.d(), mps.d());
    let mut v = ends.e_a1.clone();
    for k in 0..n {
        v = v * mps.transfer(k, &id)?;
    }
    Ok((v * &ends.e_b1)[(0, 0)].re)
}

/// Average end-to-end concurrence for the given strategy (kept sites must be
/// the two end sites), exact for every `n` because determinants factorize.
pub fn le_analytic_qubit_bond(mps: &MatrixProductState, n: usize, strategy: &MeasurementStrategy) -> Result<f64> {
    let ends = qubit_ends(mps)?;
    let dims = mps.site_dims(n)?;
    strategy.check_dims(&dims)?;
    let (i, j) = strategy.kept();
    if (i.min(j), i.max(j)) != (0, n + 1) {
        return Err(Error::DimMismatch("closed form keeps the two end sites".into()));
    }
    let mut num = 2.0 * ends.amat_det * ends.bmat_det;
    for k in 0..n {
        num *= sum_abs_det(mps.bulk(k), strategy.basis(k + 1).expect("bulk sites are measured"));
    }
    Ok(num / norm_contraction(mps, n, &ends)?)
}

/// End-to-end LE with the optimal basis on every bulk site.
pub fn le_analytic_optimal(mps: &MatrixProductState, n: usize) -> Result<f64> {
    let ends = qubit_ends(mps)?;
    mps.check_len(n)?;
    let mut num = 2.0 * ends.amat_det * ends.bmat_det;
    for k in 0..n {
        num *= e_a(mps.bulk(k))?;
    }
    Ok(num / norm_contraction(mps, n, &ends)?)
}

#[derive(Clone, Debug)]
pub struct StringOrderResult {
    /// End-to-end value at the requested length (sigma_z on the end sites).
    pub finite: f64,
    /// Large-N value from the dominant eigenvectors; `None` when the dominant
    /// eigenvalue is not simple.
    pub asymptotic: Option<f64>,
    pub lambda_1: C64,
    pub lambda_r: C64,
    /// `|lambda_R| / |lambda_1|`
    pub ratio: f64,
    /// Order vanishes asymptotically (`ratio < 1`).
    pub vanishing: bool,
}

fn simple_dominant(e: &CMat) -> Option<(C64, crate::linalg::CVec, crate::linalg::CVec)> {
    let ev = eigenvalues(e);
    let top = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead: Vec<C64> = ev.iter().copied().filter(|z| (z.norm() - top).abs() <= 1e-9 * top.max(1.0)).collect();
    if lead.len() != 1 {
        return None;
    }
    let lambda = lead[0];
    let r = eigenvector_for(e, lambda)?;
    let l = eigenvector_for(&e.transpose(), lambda)?;
    let norm = (l.transpose() * &r)[(0, 0)];
    if norm.norm() < 1e-12 {
        return None;
    }
    Some((lambda, r, l / norm))
}

/// String order between the end sites: `sigma_z` on both ends, `r` on every
/// bulk site.
pub fn string_order_analytic(mps: &MatrixProductState, n: usize, r: &CMat) -> Result<StringOrderResult> {
    let ends = qubit_ends(mps)?;
    mps.check_len(n)?;
    let id = CMat::identity(mps.d(), mps.d());
    let mut num = ends.e_az.clone();
    for k in 0..n {
        num = num * mps.transfer(k, r)?;
    }
    let finite = (num * &ends.e_bz)[(0, 0)].re / norm_contraction(mps, n, &ends)?;
    let e1 = mps.transfer(0, &id)?;
    let er = mps.transfer(0, r)?;
    let lambda_1 = crate::linalg::dominant_eigenvalue(&e1);
    let lambda_r = crate::linalg::dominant_eigenvalue(&er);
    let ratio = lambda_r.norm() / lambda_1.norm();
    let vanishing = ratio < 1.0 - 1e-9;
    let asymptotic = if mps.fixed_len().is_some() {
        None
    } else {
        match (simple_dominant(&e1), simple_dominant(&er)) {
            (Some((l1, r1, left1)), Some((lr, rr, leftr))) => {
                if vanishing {
                    Some(0.0)
                } else {
                    let top = (&ends.e_az * &rr)[(0, 0)] * (leftr.transpose() * &ends.e_bz)[(0, 0)];
                    let bottom = (&ends.e_a1 * &r1)[(0, 0)] * (left1.transpose() * &ends.e_b1)[(0, 0)];
                    Some((top / bottom * (lr / l1).powi(n as i32)).re)
                }
            }
            _ => None,
        }
    };
    Ok(StringOrderResult { finite, asymptotic, lambda_1, lambda_r, ratio, vanishing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::le::NamedBasis;
    use crate::linalg::{random_unitary, CVec, ONE};
    use crate::mps::{mps_named, MpsFamily};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn string_r() -> CMat {
        CMat::from_diagonal(&CVec::from_vec(vec![-ONE, ONE, -ONE]))
    }

    #[test]
    fn aklt_closed_forms() {
        let m = mps_named(MpsFamily::Aklt);
        assert!((e_a(m.bulk(0)).unwrap() - 3.0).abs() < 1e-12);
        for n in [1, 4, 10, 40] {
            let dims = m.site_dims(n).unwrap();
            let s = MeasurementStrategy::named(&dims, 0, n + 1, NamedBasis::UHeis).unwrap();
            assert!((le_analytic_qubit_bond(&m, n, &s).unwrap() - 1.0).abs() < 1e-12);
            assert!((le_analytic_optimal(&m, n).unwrap() - 1.0).abs() < 1e-12);
        }
        let so = string_order_analytic(&m, 8, &string_r()).unwrap();
        assert!((so.asymptotic.unwrap() - 1.0).abs() < 1e-12);
        assert!((so.finite - 1.0).abs() < 1e-12);
        assert!((so.lambda_r - C64::from(3.0)).norm() < 1e-10);
    }

    #[test]
    fn counterexample_determinants() {
        let m = mps_named(MpsFamily::CounterexampleC);
        let id = CMat::identity(2, 2);
        assert!((sum_abs_det(m.bulk(0), &id) - 4.0).abs() < 1e-12);
        assert!((e_a(m.bulk(0)).unwrap() - m.transfer_radius()).abs() < 1e-10);
        assert!((m.transfer_radius() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn takagi_basis_attains_e_a_and_beats_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for fam in [MpsFamily::Aklt, MpsFamily::CounterexampleC] {
            let m = mps_named(fam);
            let (v, u) = optimal_basis_qubit_bond(m.bulk(0)).unwrap();
            assert!((sum_abs_det(m.bulk(0), &u) - v).abs() < 1e-10);
            for _ in 0..100 {
                let r = random_unitary(&mut rng, m.d());
                assert!(sum_abs_det(m.bulk(0), &r) <= v + 1e-9);
            }
        }
    }

    #[test]
    fn ghz_and_counterexample_string_ratios() {
        let c = mps_named(MpsFamily::CounterexampleC);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let n = crate::linalg::random_unit_vector(&mut rng);
            let so = string_order_analytic(&c, 6, &crate::linalg::pauli_dot(&n)).unwrap();
            assert!(so.ratio < 1.0 && so.vanishing);
        }
        let g = mps_named(MpsFamily::Ghz);
        let e1 = g.transfer(0, &CMat::identity(2, 2)).unwrap();
        let ez = g.transfer(0, &pauli(2)).unwrap();
        let ratio = crate::linalg::spectral_radius(&ez) / crate::linalg::spectral_radius(&e1);
        assert!((ratio - 1.0).abs() < 1e-12);
        assert!(matches!(string_order_analytic(&g, 4, &pauli(2)), Err(Error::DimMismatch(_))));
    }
}
