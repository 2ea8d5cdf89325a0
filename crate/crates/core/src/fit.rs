//! Least-squares line fits used by the decay and sharpness measurements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the fit residuals.
    pub rms_residual: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Parameter(format!(
            "line fit needs two or more paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Parameter("line fit received a non-finite sample".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("line fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(LineFit { slope, intercept, rms_residual: (ss / n).sqrt(), points: xs.len() })
}

/// Fit of `ln y` against `ln t`.
pub fn loglog_slope(ts: &[f64], ys: &[f64]) -> Result<LineFit> {
    if ts.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Parameter("log-log fit needs strictly positive samples".into()));
    }
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Log-log fit with the first and last sample dropped.
pub fn loglog_slope_trimmed(ts: &[f64], ys: &[f64]) -> Result<LineFit> {
    if ts.len() < 4 || ts.len() != ys.len() {
        return Err(Error::Parameter("trimmed fit needs at least four samples".into()));
    }
    let n = ts.len();
    loglog_slope(&ts[1..n - 1], &ys[1..n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let ts: Vec<f64> = (0..10).map(|i| 2f64.powi(-i)).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * t.powf(-1.5)).collect();
        let fit = loglog_slope(&ts, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept.exp() - 3.0).abs() < 1e-10);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(linear_fit(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
