use nalgebra::DVector;

use super::{average_entanglement, LeEstimate, Measure, MeasurementStrategy};
use crate::error::{Error, Result};
use crate::hilbert::{DensityOperator, PureState, SiteDims, ThermalSpectrum, AMPLITUDE_CAP};
use crate::linalg::{CMat, C64, ZERO};
use crate::TwoSiteState;

/// Members with probability below this are dropped.
const MIN_PROBABILITY: f64 = 1e-15;
/// Mixture components with relative weight below this are dropped.
const MIN_WEIGHT: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Exact,
    Sampled,
}

impl Source {
    pub fn id(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Sampled => "sampled",
        }
    }
}

/// Post-measurement states of the kept pair, with outcome probabilities.
#[derive(Clone, Debug)]
pub struct OutcomeEnsemble {
    pub members: Vec<(f64, TwoSiteState)>,
    pub source: Source,
    pub strategy: MeasurementStrategy,
}

impl OutcomeEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.members.iter().map(|(p, _)| p).sum()
    }
}

/// A state that can be measured exactly.
pub trait EnsembleInput {
    fn site_dims(&self) -> &SiteDims;
    fn ensemble(&self, strategy: &MeasurementStrategy) -> Result<OutcomeEnsemble>;
}

/// Exact enumeration of all outcomes of `strategy`.
pub fn measurement_ensemble<S: EnsembleInput + ?Sized>(state: &S, strategy: &MeasurementStrategy) -> Result<OutcomeEnsemble> {
    strategy.check_dims(state.site_dims())?;
    state.ensemble(strategy)
}

/// Rotate every measured site into its measurement basis and return the
/// amplitudes grouped by outcome: `out[r][k]` with `k` indexing the kept pair.
fn bucketed(psi: &PureState, strategy: &MeasurementStrategy, split: &Split) -> Result<Vec<Vec<C64>>> {
    let mut rot = psi.clone();
    for site in strategy.measured_sites() {
        if !strategy.is_identity_at(site) {
            rot.apply_local(site, &strategy.basis(site).expect("measured").adjoint())?;
        }
    }
    let mut out = vec![vec![ZERO; split.dk]; split.dr];
    for (idx, z) in rot.amps().iter().enumerate() {
        out[split.r_idx[idx]][split.k_idx[idx]] = *z;
    }
    Ok(out)
}

struct Split {
    k_idx: Vec<usize>,
    r_idx: Vec<usize>,
    dk: usize,
    dr: usize,
    da: usize,
    db: usize,
}

impl Split {
    fn new(dims: &SiteDims, strategy: &MeasurementStrategy) -> Result<Self> {
        let (i, j) = strategy.kept();
        let (k_idx, r_idx, dk, dr) = dims.split(&[i, j])?;
        Ok(Self { k_idx, r_idx, dk, dr, da: dims.dim(i), db: dims.dim(j) })
    }
}

impl EnsembleInput for PureState {
    fn site_dims(&self) -> &SiteDims {
        self.dims()
    }

    fn ensemble(&self, strategy: &MeasurementStrategy) -> Result<OutcomeEnsemble> {
        let split = Split::new(self.dims(), strategy)?;
        let norm2 = self.norm().powi(2);
        let mut members = Vec::new();
        for v in bucketed(self, strategy, &split)? {
            let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let p = w / norm2;
            if p < MIN_PROBABILITY {
                continue;
            }
            let amps = DVector::from_vec(v) / C64::from(w.sqrt());
            members.push((p, TwoSiteState::pure(amps, split.da, split.db)?));
        }
        Ok(OutcomeEnsemble { members, source: Source::Exact, strategy: strategy.clone() })
    }
}

/// Convex combination of pure states, `rho = sum_k w_k |psi_k><psi_k|`.
#[derive(Clone, Debug)]
pub struct Mixture {
    dims: SiteDims,
    components: Vec<(f64, PureState)>,
}

impl Mixture {
    /// Weights are normalized; states must share `dims` and be normalized.
    pub fn new(dims: SiteDims, components: Vec<(f64, PureState)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if !(total > 0.0) || components.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidSpec("mixture weights must be nonnegative with positive sum".into()));
        }
        for (_, psi) in &components {
            if psi.dims() != &dims {
                return Err(Error::DimMismatch("mixture components on different sites".into()));
            }
        }
        let top = components.iter().map(|(w, _)| *w).fold(0.0, f64::max);
        let components =
            components.into_iter().filter(|(w, _)| *w >= MIN_WEIGHT * top).map(|(w, psi)| (w / total, psi)).collect();
        Ok(Self { dims, components })
    }

    /// Gibbs state at temperature `t` as a mixture of eigenvectors.
    pub fn thermal(spec: &ThermalSpectrum, t: f64) -> Result<Self> {
        let w = spec.weights(t)?;
        let comps = w.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(k, &x)| (x, spec.state(k))).collect();
        Self::new(spec.dims().clone(), comps)
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn to_density(&self) -> DensityOperator {
        let n = self.dims.total();
        let mut rho = CMat::zeros(n, n);
        for (w, psi) in &self.components {
            let v = psi.to_vector();
            rho += &v * v.adjoint() * C64::from(*w);
        }
        DensityOperator::new(self.dims.clone(), rho).expect("convex combination of states")
    }
}

impl EnsembleInput for Mixture {
    fn site_dims(&self) -> &SiteDims {
        &self.dims
    }

    fn ensemble(&self, strategy: &MeasurementStrategy) -> Result<OutcomeEnsemble> {
        let split = Split::new(&self.dims, strategy)?;
        let mut blocks = vec![CMat::zeros(split.dk, split.dk); split.dr];
        for (w, psi) in &self.components {
            for (r, v) in bucketed(psi, strategy, &split)?.into_iter().enumerate() {
                let v = DVector::from_vec(v);
                blocks[r] += &v * v.adjoint() * C64::from(*w);
            }
        }
        let mut members = Vec::new();
        for b in blocks {
            let p = b.trace().re;
            if p < MIN_PROBABILITY {
                continue;
            }
            let rho = (&b + b.adjoint()) * C64::from(0.5 / p);
            members.push((p, TwoSiteState::mixed(rho, split.da, split.db)?));
        }
        Ok(OutcomeEnsemble { members, source: Source::Exact, strategy: strategy.clone() })
    }
}

impl EnsembleInput for DensityOperator {
    fn site_dims(&self) -> &SiteDims {
        self.dims()
    }

    fn ensemble(&self, strategy: &MeasurementStrategy) -> Result<OutcomeEnsemble> {
        let dims = self.dims();
        if dims.total() > AMPLITUDE_CAP {
            return Err(Error::DimensionCap { requested: dims.total(), cap: AMPLITUDE_CAP });
        }
        let eig = self.matrix().clone().symmetric_eigen();
        let comps = (0..dims.total())
            .filter(|&k| eig.eigenvalues[k] > 0.0)
            .map(|k| {
                let v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
                Ok((eig.eigenvalues[k], PureState::new(dims.clone(), v)?.normalized()?))
            })
            .collect::<Result<Vec<_>>>()?;
        Mixture::new(dims.clone(), comps)?.ensemble(strategy)
    }
}

/// Exact LE of the Gibbs state at temperature `t`.
pub fn le_thermal_exact(spec: &ThermalSpectrum, t: f64, strategy: &MeasurementStrategy, measure: Measure) -> Result<LeEstimate> {
    let mix = Mixture::thermal(spec, t)?;
    average_entanglement(&measurement_ensemble(&mix, strategy)?, measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_hamiltonian, build_named_state, Boundary, ModelFamily, ModelSpec, NamedState};
    use crate::le::{le_exact, NamedBasis};
    use crate::linalg::{random_density, random_state, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_three_sites() {
        let g = build_named_state(NamedState::Ghz, 3).unwrap();
        let sx = MeasurementStrategy::named(g.dims(), 0, 2, NamedBasis::SigmaX).unwrap();
        let ens = measurement_ensemble(&g, &sx).unwrap();
        assert_eq!(ens.members.len(), 2);
        for (p, st) in &ens.members {
            assert!((p - 0.5).abs() < 1e-14);
            assert!((Measure::Concurrence.of(st).unwrap() - 1.0).abs() < 1e-14);
        }
        let e = average_entanglement(&ens, Measure::Concurrence).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-14 && e.fluctuation < 1e-7);
        let sz = MeasurementStrategy::standard(g.dims(), 0, 2).unwrap();
        let e = le_exact(&g, &sz, Measure::Concurrence).unwrap();
        assert!(e.mean.abs() < 1e-14);
    }

    #[test]
    fn bell_product_mixture_statistics() {
        let bell = TwoSiteState::pure(DVector::from_vec(vec![ZERO, C64::from(0.5f64.sqrt()), C64::from(0.5f64.sqrt()), ZERO]), 2, 2).unwrap();
        let prod = TwoSiteState::pure(DVector::from_vec(vec![C64::from(1.0), ZERO, ZERO, ZERO]), 2, 2).unwrap();
        let dims = SiteDims::uniform(2, 3).unwrap();
        let strategy = MeasurementStrategy::standard(&dims, 0, 1).unwrap();
        let ens = OutcomeEnsemble { members: vec![(0.5, bell.clone()), (0.5, prod)], source: Source::Exact, strategy: strategy.clone() };
        let e = average_entanglement(&ens, Measure::Concurrence).unwrap();
        assert!((e.mean - 0.5).abs() < 1e-14 && (e.fluctuation - 0.5).abs() < 1e-14);
        let same = OutcomeEnsemble { members: vec![(0.25, bell.clone()); 4], source: Source::Exact, strategy };
        let e = average_entanglement(&same, Measure::Concurrence).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-14 && e.fluctuation < 1e-7);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = SiteDims::uniform(2, 6).unwrap();
        for _ in 0..100 {
            let psi = PureState::new(dims.clone(), random_state(&mut rng, 64).iter().copied().collect()).unwrap();
            let i = rng.gen_range(0..6);
            let j = (i + rng.gen_range(1..6)) % 6;
            let us: Vec<CMat> = (0..6).map(|_| random_unitary(&mut rng, 2)).collect();
            let s = MeasurementStrategy::from_fn(&dims, i, j, |k, _| Some(us[k].clone()), "r").unwrap();
            let ens = measurement_ensemble(&psi, &s).unwrap();
            assert!((ens.total_probability() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_input_matches_pure_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = SiteDims::new(vec![2, 3, 2, 2]).unwrap();
        let psi = PureState::new(dims.clone(), random_state(&mut rng, 24).iter().copied().collect()).unwrap();
        let s = MeasurementStrategy::from_fn(&dims, 0, 3, |_, d| Some(random_unitary(&mut rng.clone(), d)), "r").unwrap();
        let a = le_exact(&psi, &s, Measure::Negativity).unwrap();
        let b = le_exact(&DensityOperator::from_pure(&psi), &s, Measure::Negativity).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-10);
        let c = le_exact(&DensityOperator::from_pure(&psi), &s, Measure::Concurrence).unwrap();
        let d = le_exact(&psi, &s, Measure::Concurrence).unwrap();
        assert!((c.mean - d.mean).abs() < 1e-8);
        assert!(matches!(le_exact(&DensityOperator::from_pure(&psi), &s, Measure::Entropy), Err(Error::MeasureMismatch { .. })));
        let rho = DensityOperator::new(dims.clone(), random_density(&mut rng, 24, 24)).unwrap();
        assert!((measurement_ensemble(&rho, &s).unwrap().total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_limits() {
        let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda: 0.5 }, 6, Boundary::Periodic);
        let h = build_hamiltonian(&spec).unwrap();
        let ts = ThermalSpectrum::new(&h).unwrap();
        let s = MeasurementStrategy::standard(ts.dims(), 0, 3).unwrap();
        let ground = ts.state(0);
        let pure = le_exact(&ground, &s, Measure::Negativity).unwrap();
        let cold = le_thermal_exact(&ts, 1e-3, &s, Measure::Negativity).unwrap();
        assert!((pure.mean - cold.mean).abs() < 1e-9);
        let hot = le_thermal_exact(&ts, 1e6, &s, Measure::Negativity).unwrap();
        assert!(hot.mean < 1e-6);
    }
}
