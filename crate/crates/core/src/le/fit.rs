use crate::error::{Error, Result};

/// Below this, `L_n` counts as zero.
const ZERO_LE: f64 = 1e-300;

#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Inclusive range of `n` used; `None` uses all points.
    pub window: Option<(usize, usize)>,
    /// A slope of `-ln L` below this means saturation (`xi` infinite).
    pub saturation_slope: f64,
    /// RMS residual of the `-ln L` fit above which the decay is not exponential.
    pub linearity_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { window: None, saturation_slope: 1e-3, linearity_tol: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    /// Entanglement length: `1 / slope` of `-ln L_n` vs `n`; infinite when
    /// saturating, 0 for a vanishing tail.
    pub xi: f64,
    pub window: (usize, usize),
    /// RMS residual of the linear fit of `-ln L_n`.
    pub residual: f64,
    pub saturating: bool,
    /// Residual is above the linearity tolerance.
    pub nonlinear: bool,
    /// A power law `L ~ n^-a` fits better than an exponential.
    pub power_law: bool,
    pub slope: f64,
    pub intercept: f64,
}

/// Least squares line; returns (slope, intercept, rms residual).
fn linfit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - slope * a - icpt).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

pub fn entanglement_length_fit(samples: &[(usize, f64)], opts: &FitOptions) -> Result<FitResult> {
    let mut pts: Vec<(usize, f64)> =
        samples.iter().copied().filter(|(n, _)| opts.window.map_or(true, |(a, b)| *n >= a && *n <= b)).collect();
    pts.sort_by_key(|p| p.0);
    if pts.is_empty() {
        return Err(Error::InsufficientData("no points in the fit window".into()));
    }
    let window = (pts[0].0, pts[pts.len() - 1].0);
    let tail = &pts[pts.len().saturating_sub(3)..];
    if tail.iter().all(|(_, l)| *l <= ZERO_LE) {
        return Ok(FitResult {
            xi: 0.0,
            window,
            residual: 0.0,
            saturating: false,
            nonlinear: false,
            power_law: false,
            slope: f64::INFINITY,
            intercept: 0.0,
        });
    }
    let pos: Vec<(usize, f64)> = pts.into_iter().filter(|(_, l)| *l > ZERO_LE).collect();
    if pos.len() < 3 {
        return Err(Error::InsufficientData(format!("{} positive points, need 3", pos.len())));
    }
    let x: Vec<f64> = pos.iter().map(|(n, _)| *n as f64).collect();
    let y: Vec<f64> = pos.iter().map(|(_, l)| -l.ln()).collect();
    let (slope, intercept, residual) = linfit(&x, &y);
    let power_law = x.iter().all(|&v| v > 0.0) && {
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let (_, _, r) = linfit(&lx, &y);
        r < residual && residual > opts.linearity_tol
    };
    let saturating = slope < opts.saturation_slope;
    Ok(FitResult {
        xi: if saturating { f64::INFINITY } else { 1.0 / slope },
        window,
        residual,
        saturating,
        nonlinear: residual > opts.linearity_tol,
        power_law,
        slope,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<(usize, f64)> = (1..10).map(|n| (n, (-(n as f64) / 2.0).exp())).collect();
        let f = entanglement_length_fit(&s, &FitOptions::default()).unwrap();
        assert!((f.xi - 2.0).abs() < 1e-9 && !f.saturating && !f.nonlinear && !f.power_law);
    }

    #[test]
    fn constant_saturates() {
        let s: Vec<(usize, f64)> = (1..10).map(|n| (n, 0.96)).collect();
        let f = entanglement_length_fit(&s, &FitOptions::default()).unwrap();
        assert!(f.saturating && f.xi.is_infinite());
    }

    #[test]
    fn power_law_flagged() {
        let s: Vec<(usize, f64)> = (1..12).map(|n| (n, (n as f64).powf(-0.25))).collect();
        let f = entanglement_length_fit(&s, &FitOptions::default()).unwrap();
        assert!(f.power_law && f.nonlinear);
    }

    #[test]
    fn zero_tail_and_short_input() {
        let s = vec![(1, 0.3), (2, 0.0), (3, 0.0), (4, 0.0)];
        assert_eq!(entanglement_length_fit(&s, &FitOptions::default()).unwrap().xi, 0.0);
        let s = vec![(1, 0.3), (2, 0.1)];
        assert!(matches!(entanglement_length_fit(&s, &FitOptions::default()), Err(Error::InsufficientData(_))));
        let w = FitOptions { window: Some((5, 9)), ..Default::default() };
        assert!(matches!(entanglement_length_fit(&[(1, 0.5)], &w), Err(Error::InsufficientData(_))));
    }
}
