//! Localizable entanglement: outcome ensembles, averaged entanglement,
//! basis optimization, Monte Carlo sampling and entanglement lengths.

mod ensemble;
mod fit;
mod monte_carlo;
mod optimize;
mod strategy;
mod witness;

pub use ensemble::{le_thermal_exact, measurement_ensemble, EnsembleInput, Mixture, OutcomeEnsemble, Source};
pub use fit::{entanglement_length_fit, FitOptions, FitResult};
pub use monte_carlo::{le_monte_carlo, McOptions};
pub use optimize::{basis_from_params, optimize_le, OptimizeOptions};
pub use strategy::{MeasurementStrategy, NamedBasis};
pub use witness::{nondecreasing_direction_witness, Witness};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measures;
use crate::TwoSiteState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Concurrence,
    Entropy,
    Negativity,
}

impl Measure {
    pub fn id(self) -> &'static str {
        match self {
            Self::Concurrence => "concurrence",
            Self::Entropy => "entropy",
            Self::Negativity => "negativity",
        }
    }

    /// Entanglement of one ensemble member.
    pub fn of(self, state: &TwoSiteState) -> Result<f64> {
        match (self, state) {
            (Self::Concurrence, _) => measures::concurrence(state),
            (Self::Entropy, TwoSiteState::Pure { .. }) => measures::entropy_of_entanglement(state),
            (Self::Entropy, TwoSiteState::Mixed { .. }) => {
                Err(Error::MeasureMismatch { measure: "entropy".into(), member: "mixed".into() })
            }
            (Self::Negativity, _) => measures::negativity(state),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concurrence" => Ok(Self::Concurrence),
            "entropy" => Ok(Self::Entropy),
            "negativity" => Ok(Self::Negativity),
            other => Err(Error::InvalidSpec(format!("unknown measure '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LeEstimate {
    pub mean: f64,
    /// `sqrt(<E^2> - <E>^2)` over outcomes.
    pub fluctuation: f64,
    /// `fluctuation / sqrt(samples)` for sampled estimates, 0 when exact.
    pub std_error: f64,
    pub samples: usize,
    pub strategy: MeasurementStrategy,
    pub measure: Measure,
    pub source: Source,
    /// Integrated autocorrelation time in sweeps (Monte Carlo only).
    pub autocorr_time: Option<f64>,
}

/// Weighted mean and fluctuation of the member entanglements.
pub fn average_entanglement(ens: &OutcomeEnsemble, measure: Measure) -> Result<LeEstimate> {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (p, st) in &ens.members {
        let e = measure.of(st)?;
        m1 += p * e;
        m2 += p * e * e;
    }
    let total: f64 = ens.members.iter().map(|(p, _)| p).sum();
    if total > 0.0 {
        m1 /= total;
        m2 /= total;
    }
    Ok(LeEstimate {
        mean: m1.max(0.0),
        fluctuation: (m2 - m1 * m1).max(0.0).sqrt(),
        std_error: 0.0,
        samples: ens.members.len(),
        strategy: ens.strategy.clone(),
        measure,
        source: ens.source,
        autocorr_time: None,
    })
}

/// Exact LE estimate for a fixed strategy.
pub fn le_exact<S: EnsembleInput + ?Sized>(state: &S, strategy: &MeasurementStrategy, measure: Measure) -> Result<LeEstimate> {
    average_entanglement(&measurement_ensemble(state, strategy)?, measure)
}
