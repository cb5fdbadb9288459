use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{average_entanglement, measurement_ensemble, EnsembleInput, LeEstimate, Measure, MeasurementStrategy};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    /// Total starts, warm starts included.
    pub restarts: usize,
    /// Simplex spread of objective values at convergence.
    pub tol: f64,
    pub max_iters: u64,
    /// One basis per measured site instead of one per local dimension.
    pub per_site: bool,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { restarts: 20, tol: 1e-8, max_iters: 2000, per_site: false, seed: 0 }
    }
}

/// Basis from `d (d - 1)` angles: a product of complex Givens rotations over
/// the pairs `(0,1), (0,2), ..., (d-2,d-1)`, each with `(theta, phi)`.
/// Column phases are irrelevant for a measurement, so this covers all bases.
pub fn basis_from_params(d: usize, params: &[f64]) -> CMat {
    assert_eq!(params.len(), d * (d - 1), "basis parameters");
    let mut u = CMat::identity(d, d);
    let mut k = 0;
    for a in 0..d {
        for b in a + 1..d {
            let (theta, phi) = (params[k], params[k + 1]);
            k += 2;
            let (s, c) = theta.sin_cos();
            let mut g = CMat::identity(d, d);
            g[(a, a)] = C64::from(c);
            g[(a, b)] = -C64::from_polar(s, -phi);
            g[(b, a)] = C64::from_polar(s, phi);
            g[(b, b)] = C64::from(c);
            u *= g;
        }
    }
    u
}

fn named_params(d: usize, which: usize) -> Vec<f64> {
    let mut p = vec![0.0; d * (d - 1)];
    match (d, which) {
        (2, 1) => p[0] = FRAC_PI_4,
        (2, 2) => {
            p[0] = FRAC_PI_4;
            p[1] = FRAC_PI_2;
        }
        // pair (0, 2)
        (3, 3) => p[2] = FRAC_PI_4,
        _ => {}
    }
    p
}

struct Layout {
    /// Parameter block of each chain site (None for kept sites).
    block_of: Vec<Option<usize>>,
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    n_params: usize,
}

impl Layout {
    fn new(dims: &[usize], i: usize, j: usize, per_site: bool) -> Self {
        let mut block_dims = Vec::new();
        let mut block_of = vec![None; dims.len()];
        for (k, &d) in dims.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let b = if per_site { None } else { block_dims.iter().position(|&x| x == d) };
            block_of[k] = Some(b.unwrap_or_else(|| {
                block_dims.push(d);
                block_dims.len() - 1
            }));
        }
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut n = 0;
        for &d in &block_dims {
            offsets.push(n);
            n += d * (d - 1);
        }
        Self { block_of, block_dims, offsets, n_params: n }
    }

    fn strategy(&self, dims: &crate::hilbert::SiteDims, i: usize, j: usize, params: &[f64], uniform: bool) -> Result<MeasurementStrategy> {
        let unitaries: Vec<CMat> = self
            .block_dims
            .iter()
            .zip(&self.offsets)
            .map(|(&d, &o)| basis_from_params(d, &params[o..o + d * (d - 1)]))
            .collect();
        if uniform {
            MeasurementStrategy::uniform(dims, i, j, |d| self.block_dims.iter().position(|&x| x == d).map(|b| unitaries[b].clone()), "optimized")
        } else {
            MeasurementStrategy::from_fn(dims, i, j, |k, _| self.block_of[k].map(|b| unitaries[b].clone()), "optimized")
        }
    }

    fn warm(&self, which: usize) -> Vec<f64> {
        self.block_dims.iter().flat_map(|&d| named_params(d, which)).collect()
    }
}

struct Objective<'a, S: ?Sized> {
    state: &'a S,
    layout: &'a Layout,
    kept: (usize, usize),
    measure: Measure,
}

impl<S: EnsembleInput + ?Sized> Objective<'_, S> {
    fn value(&self, params: &[f64]) -> Result<f64> {
        let (i, j) = self.kept;
        let s = self.layout.strategy(self.state.site_dims(), i, j, params, false)?;
        Ok(average_entanglement(&measurement_ensemble(self.state, &s)?, self.measure)?.mean)
    }
}

impl<S: EnsembleInput + ?Sized> CostFunction for Objective<'_, S> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        self.value(p).map(|v| -v).map_err(|e| argmin::core::Error::msg(e.to_string()))
    }
}

fn wrap(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| x.rem_euclid(TAU)).collect()
}

/// Maximize the averaged entanglement of the pair `(i, j)` over measurement
/// bases. Warm starts are the standard, sigma_x, sigma_y and U bases; the
/// remaining starts are random. Ties (within 1e-12) go to the
/// lexicographically smallest wrapped parameter vector.
pub fn optimize_le<S: EnsembleInput + ?Sized>(state: &S, i: usize, j: usize, measure: Measure, opts: &OptimizeOptions) -> Result<LeEstimate> {
    let dims = state.site_dims().clone();
    let layout = Layout::new(dims.dims(), i, j, opts.per_site);
    // validates the pair
    MeasurementStrategy::standard(&dims, i, j)?;
    let obj = Objective { state, layout: &layout, kept: (i, j), measure };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for w in 0..4 {
        let p = layout.warm(w);
        if !starts.contains(&p) {
            starts.push(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while starts.len() < opts.restarts.max(1) {
        starts.push((0..layout.n_params).map(|k| if k % 2 == 0 { rng.gen_range(0.0..FRAC_PI_2) } else { rng.gen_range(0.0..TAU) }).collect());
    }
    starts.truncate(opts.restarts.max(1));

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |value: f64, params: Vec<f64>| {
        let params = wrap(&params);
        let better = match &best {
            None => true,
            Some((bv, bp)) => value > bv + 1e-12 || ((value - bv).abs() <= 1e-12 && params < *bp),
        };
        if better {
            best = Some((value, params));
        }
    };
    for x0 in starts {
        if layout.n_params == 0 {
            consider(obj.value(&x0)?, x0);
            continue;
        }
        let mut simplex = vec![x0.clone()];
        for k in 0..layout.n_params {
            let mut v = x0.clone();
            v[k] += 0.3;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(opts.tol).map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let res = Executor::new(Objective { state, layout: &layout, kept: (i, j), measure }, solver)
            .configure(|c| c.max_iters(opts.max_iters))
            .run()
            .map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let st = res.state();
        let p = st.get_best_param().cloned().unwrap_or(x0);
        consider(-st.get_best_cost(), p);
    }
    let (_, params) = best.expect("at least one start");
    let strategy = layout.strategy(&dims, i, j, &params, !opts.per_site)?;
    average_entanglement(&measurement_ensemble(state, &strategy)?, measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_named_state, NamedState};
    use crate::le::NamedBasis;
    use crate::linalg::is_unitary;

    fn same_basis(a: &CMat, b: &CMat) -> bool {
        // equal up to column phases and order
        let overlap = a.adjoint() * b;
        (0..a.ncols()).all(|c| (0..a.ncols()).any(|r| (overlap[(r, c)].norm() - 1.0).abs() < 1e-6))
    }

    #[test]
    fn givens_parameterization() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..5 {
            let p: Vec<f64> = (0..d * (d - 1)).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert!(is_unitary(&basis_from_params(d, &p), 1e-13));
        }
        assert!(same_basis(&basis_from_params(2, &named_params(2, 1)), &NamedBasis::SigmaX.unitary(2).unwrap()));
        assert!(same_basis(&basis_from_params(2, &named_params(2, 2)), &NamedBasis::SigmaY.unitary(2).unwrap()));
        assert!(same_basis(&basis_from_params(3, &named_params(3, 3)), &NamedBasis::UHeis.unitary(3).unwrap()));
    }

    #[test]
    fn ghz_optimum_is_sigma_x_like() {
        let g = build_named_state(NamedState::Ghz, 3).unwrap();
        let e = optimize_le(&g, 0, 2, Measure::Concurrence, &OptimizeOptions::default()).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-8);
        assert!(e.strategy.is_uniform());
        // any equatorial basis is optimal for GHZ
        let u = e.strategy.basis(1).unwrap();
        assert!((u[(0, 0)].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn cluster_ends() {
        let c = build_named_state(NamedState::Cluster, 4).unwrap();
        let e = optimize_le(&c, 0, 3, Measure::Concurrence, &OptimizeOptions::default()).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-8);
    }
}
