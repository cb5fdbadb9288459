pub mod correlations;
pub mod error;
pub mod hilbert;
pub mod le;
pub mod linalg;
pub mod measures;
pub mod mps;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision two-site state.
pub type TwoSiteState = measures::TwoSiteState<f64>;
pub type SchmidtDecomp = measures::SchmidtDecomp<f64>;
