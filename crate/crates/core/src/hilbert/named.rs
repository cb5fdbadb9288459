use super::{PureState, SiteDims};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedState {
    Ghz,
    /// Open-chain cluster state: controlled-phase on every neighbouring pair of `|+...+>`.
    Cluster,
    ProductAllZero,
}

pub fn build_named_state(name: NamedState, n: usize) -> Result<PureState> {
    let min = if name == NamedState::Cluster { 3 } else { 2 };
    if n < min {
        return Err(Error::InvalidSpec(format!("{name:?} needs at least {min} sites, got {n}")));
    }
    let dims = SiteDims::uniform(2, n)?;
    let total = dims.total();
    let amps: Vec<f64> = match name {
        NamedState::Ghz => (0..total)
            .map(|i| if i == 0 || i == total - 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.0 })
            .collect(),
        NamedState::Cluster => {
            let a = (total as f64).sqrt().recip();
            (0..total)
                .map(|i| {
                    let links = (0..n - 1).filter(|&k| dims.digit(i, k) == 1 && dims.digit(i, k + 1) == 1).count();
                    if links % 2 == 0 {
                        a
                    } else {
                        -a
                    }
                })
                .collect()
        }
        NamedState::ProductAllZero => (0..total).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
    };
    PureState::from_real(dims, &amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_three() {
        let g = build_named_state(NamedState::Ghz, 3).unwrap();
        let a = g.amps();
        assert!((a[0].re - 0.5f64.sqrt()).abs() < 1e-15 && (a[7].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(a[1..7].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn cluster_is_normalized() {
        let c = build_named_state(NamedState::Cluster, 5).unwrap();
        assert!((c.norm() - 1.0).abs() < 1e-14);
        assert!(build_named_state(NamedState::Cluster, 2).is_err());
    }
}
