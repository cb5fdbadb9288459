use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LeEstimate, Measure, MeasurementStrategy, Source};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::mps::{ConditionalEvaluator, MatrixProductState};
use crate::TwoSiteState;

const MAX_START_TRIES: usize = 1000;

#[derive(Clone, Debug)]
pub struct McOptions {
    /// Recorded sweeps per chain.
    pub sweeps: usize,
    /// Discarded sweeps per chain; `None` means 10% of `sweeps`.
    pub burn_in: Option<usize>,
    pub chains: usize,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { sweeps: 20_000, burn_in: None, chains: 1, seed: 0 }
    }
}

fn weight(amps: &[C64]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum()
}

fn member(amps: Vec<C64>, w: f64, dims: (usize, usize)) -> Result<TwoSiteState> {
    TwoSiteState::pure(DVector::from_vec(amps) / C64::from(w.sqrt()), dims.0, dims.1)
}

/// One Metropolis chain; returns the entanglement recorded after each sweep.
fn run_chain(
    mps: &MatrixProductState,
    n: usize,
    strategy: &MeasurementStrategy,
    measure: Measure,
    sweeps: usize,
    burn_in: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let dims = mps.site_dims(n)?;
    let (i, j) = strategy.kept();
    let pair = (dims.dim(i), dims.dim(j));
    let measured = strategy.measured_sites();
    let local: Vec<usize> = measured.iter().map(|&k| dims.dim(k)).collect();
    let mut ev = None;
    for _ in 0..MAX_START_TRIES {
        let start: Vec<usize> = local.iter().map(|&d| rng.gen_range(0..d)).collect();
        let e = ConditionalEvaluator::new(mps, n, strategy, &start)?;
        let w = weight(&e.amplitudes());
        if w > 0.0 && w.is_finite() {
            ev = Some(e);
            break;
        }
    }
    let mut ev = ev.ok_or(Error::ZeroProbabilityStart(MAX_START_TRIES))?;
    let mut amps = ev.amplitudes();
    let mut w = weight(&amps);
    let mut value = measure.of(&member(amps.clone(), w, pair)?)?;
    let mut out = Vec::with_capacity(sweeps);
    for sweep in 0..burn_in + sweeps {
        for _ in 0..measured.len() {
            let m = rng.gen_range(0..measured.len());
            let d = local[m];
            let step = if rng.gen::<bool>() { 1 } else { d - 1 };
            let o = (ev.outcome()[m] + step) % d;
            let trial = ev.amplitudes_with(m, o);
            let wt = weight(&trial);
            if wt >= w || rng.gen::<f64>() < wt / w {
                ev.set(m, o);
                amps = trial;
                w = wt;
                value = f64::NAN;
            }
        }
        if sweep >= burn_in {
            if value.is_nan() {
                value = measure.of(&member(amps.clone(), w, pair)?)?;
            }
            out.push(value);
        }
    }
    Ok(out)
}

/// Integrated autocorrelation time `1 + 2 sum_t rho(t)`, summed until the
/// window reaches five times the running estimate.
fn autocorrelation_time(x: &[f64]) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if n < 2 || var <= 1e-24 * (1.0 + mean * mean) {
        return 1.0;
    }
    let mut tau = 1.0;
    for t in 1..n {
        let c = x[..n - t].iter().zip(&x[t..]).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>() / ((n - t) as f64 * var);
        tau += 2.0 * c;
        if t as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Metropolis estimate of the averaged entanglement for a fixed strategy.
///
/// The chain moves through outcome tuples with single-site proposals
/// `s -> s +- 1 (mod d)`; one sweep is one proposal per measured site, and
/// the entanglement is recorded once per sweep. Chains use seeds drawn from
/// the master seed and are pooled in order.
pub fn le_monte_carlo(
    mps: &MatrixProductState,
    n: usize,
    strategy: &MeasurementStrategy,
    measure: Measure,
    opts: &McOptions,
) -> Result<LeEstimate> {
    if opts.sweeps == 0 || opts.chains == 0 {
        return Err(Error::InvalidSpec("need at least one sweep and one chain".into()));
    }
    strategy.check_dims(&mps.site_dims(n)?)?;
    let burn_in = opts.burn_in.unwrap_or(opts.sweeps / 10);
    let mut master = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pooled = Vec::with_capacity(opts.sweeps * opts.chains);
    let mut taus = Vec::new();
    for _ in 0..opts.chains {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let samples = run_chain(mps, n, strategy, measure, opts.sweeps, burn_in, &mut rng)?;
        taus.push(autocorrelation_time(&samples));
        pooled.extend(samples);
    }
    let m = pooled.len() as f64;
    let mean = pooled.iter().sum::<f64>() / m;
    let second = pooled.iter().map(|v| v * v).sum::<f64>() / m;
    let fluctuation = (second - mean * mean).max(0.0).sqrt();
    Ok(LeEstimate {
        mean,
        fluctuation,
        std_error: fluctuation / m.sqrt(),
        samples: pooled.len(),
        strategy: strategy.clone(),
        measure,
        source: Source::Sampled,
        autocorr_time: Some(taus.iter().sum::<f64>() / taus.len() as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::le::{le_exact, NamedBasis};
    use crate::mps::{densify, mps_named, MpsFamily};

    #[test]
    fn ghz_sigma_x_is_exact() {
        let g = mps_named(MpsFamily::Ghz);
        let dims = g.site_dims(6).unwrap();
        let s = MeasurementStrategy::named(&dims, 1, 4, NamedBasis::SigmaX).unwrap();
        for seed in 0..3 {
            let e = le_monte_carlo(&g, 6, &s, Measure::Concurrence, &McOptions { sweeps: 200, seed, ..Default::default() }).unwrap();
            assert!((e.mean - 1.0).abs() < 1e-12 && e.std_error < 1e-6);
        }
    }

    #[test]
    fn aklt_long_chain() {
        let a = mps_named(MpsFamily::Aklt);
        let dims = a.site_dims(80).unwrap();
        let s = MeasurementStrategy::named(&dims, 0, 81, NamedBasis::UHeis).unwrap();
        let e = le_monte_carlo(&a, 80, &s, Measure::Concurrence, &McOptions { sweeps: 50, ..Default::default() }).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-9 && e.fluctuation < 1e-6);
    }

    #[test]
    fn matches_exact_on_small_chain() {
        let c = mps_named(MpsFamily::CounterexampleC);
        let dims = c.site_dims(6).unwrap();
        let s = MeasurementStrategy::standard(&dims, 0, 7).unwrap();
        let exact = le_exact(&densify(&c, 6).unwrap(), &s, Measure::Concurrence).unwrap();
        let e = le_monte_carlo(&c, 6, &s, Measure::Concurrence, &McOptions { sweeps: 20_000, chains: 2, seed: 5, ..Default::default() }).unwrap();
        assert!((e.mean - exact.mean).abs() < 4.0 * e.std_error * e.autocorr_time.unwrap().sqrt() + 1e-12, "{} vs {}", e.mean, exact.mean);
    }

    #[test]
    fn autocorrelation_of_iid_and_constant() {
        assert_eq!(autocorrelation_time(&[0.3; 50]), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..20_000).map(|_| rng.gen()).collect();
        assert!((autocorrelation_time(&x) - 1.0).abs() < 0.1);
    }
}
