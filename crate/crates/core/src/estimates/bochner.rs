//! A forcing `f ∈ L²(ℝ, H)` on `H = L²(0, 1)`, `A = α·`, for which
//! `σ ↦ ‖A^{-1} T_s(σ) f(· - σ)‖` is not integrable near 0.
//!
//! With `f(t, α) = α^{-1/2} (|ln α| + 1)^{-r/2} φ(t)` and `‖φ‖ = 1`,
//! `g(σ)² = ∫_0^1 α^{-3} e^{-2σ/α} (|ln α| + 1)^{-r} dα`. Substituting
//! `α = σ e^u` concentrates the mass at `u ≈ 0` (`α ≈ σ`):
//! `σ² g(σ)² = ∫_{-∞}^{-ln σ} e^{-2u - 2e^{-u}} (|ln σ + u| + 1)^{-r} du`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_panels};

/// Below `u = -6` the integrand is under `e^{-790}`.
const U_MIN: f64 = -6.0;
const INNER_TOL: f64 = 1e-13;

fn check_r(r: f64) -> Result<Option<String>> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Parameter(format!("r must exceed 1 for f to lie in L², got {r}")));
    }
    Ok((r > 2.0).then(|| format!("r = {r} is outside (1, 2]; the divergence signature is not expected")))
}

/// `σ² g(σ)²` for `0 < σ <= 1`.
pub fn bochner_inner(sigma: f64, r: f64) -> f64 {
    let ls = sigma.ln();
    let upper = -ls;
    let f = |u: f64| (-2.0 * u - 2.0 * (-u).exp()).exp() * ((ls + u).abs() + 1.0).powf(-r);
    let pieces = ((upper - U_MIN) / 0.25).ceil().max(1.0) as usize;
    integrate_panels(&f, U_MIN, upper, pieces, INNER_TOL)
}

/// `g(σ) = ‖A^{-1} T_s(σ) f(· - σ)‖_{L²(ℝ, H)}`.
pub fn bochner_g(sigma: f64, r: f64) -> f64 {
    bochner_inner(sigma, r).sqrt() / sigma
}

/// `‖f‖² = ∫_0^1 α^{-1} (|ln α| + 1)^{-r} dα` by quadrature, after
/// `α = exp(1 - e^s)`, which turns the integrand into `e^{(1-r)s}`; the
/// range is cut where the remaining tail is below `1e-14`.
pub fn bochner_norm_sq(r: f64) -> Result<f64> {
    check_r(r)?;
    let s_max = (1e-14 * (r - 1.0)).ln() / (1.0 - r);
    let integrand = |s: f64| {
        // w = |ln α| = e^s - 1, dα/α = dw = e^s ds
        let w = s.exp_m1();
        (w + 1.0).powf(-r) * s.exp()
    };
    let pieces = (s_max / 0.5).ceil() as usize;
    Ok(integrate_panels(&integrand, 0.0, s_max, pieces, 1e-13))
}

#[derive(Debug, Clone, Serialize)]
pub struct BochnerReport {
    pub r: f64,
    pub warning: Option<String>,
    pub norm_sq: f64,
    pub norm_sq_exact: f64,
    /// `(σ, g(σ), g(σ) σ (|ln σ| + 1)^{r/2})`.
    pub band: Vec<(f64, f64, f64)>,
    /// Largest over smallest scaled value.
    pub band_ratio: f64,
    /// `(ε, ∫_ε^1 g)` for `ε = 2^{-1}, 2^{-2}, ...`.
    pub partial: Vec<(f64, f64)>,
    /// `∫_{ε/2}^{ε} g` for each halving.
    pub increments: Vec<f64>,
    /// Last increment over the one before.
    pub last_increment_ratio: f64,
    pub norm_ok: bool,
    pub band_ok: bool,
    pub divergent: bool,
    pub pass: bool,
}

/// Thresholds for the verdict.
pub const NORM_TOL: f64 = 1e-4;
pub const BAND_FACTOR: f64 = 3.0;
pub const INCREMENT_FLOOR: f64 = 0.5;

/// Evaluate `g` on `sigmas` and `∫_ε^1 g` for `ε = 2^{-1}, ..., 2^{-halvings}`.
pub fn bochner_counterexample(r: f64, sigmas: &[f64], halvings: u32) -> Result<BochnerReport> {
    let warning = check_r(r)?;
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(Error::Parameter("sigma grid must be nonempty and inside (0, 1]".into()));
    }
    if halvings < 2 {
        return Err(Error::Parameter("need two or more halvings".into()));
    }
    let norm_sq = bochner_norm_sq(r)?;
    let norm_sq_exact = 1.0 / (r - 1.0);
    let band: Vec<(f64, f64, f64)> = sigmas
        .iter()
        .map(|&s| {
            let g = bochner_g(s, r);
            (s, g, g * s * (s.ln().abs() + 1.0).powf(0.5 * r))
        })
        .collect();
    let hi = band.iter().map(|b| b.2).fold(0.0, f64::max);
    let lo = band.iter().map(|b| b.2).fold(f64::INFINITY, f64::min);
    let band_ratio = hi / lo;

    // σ = e^{-w}: ∫ g dσ = ∫ σ g(σ) dw = ∫ sqrt(σ² g²) dw
    let ln2 = std::f64::consts::LN_2;
    let integrand = |w: f64| bochner_inner((-w).exp(), r).sqrt();
    let mut increments = Vec::with_capacity(halvings as usize);
    // first piece: [1/2, 1]
    increments.push(integrate(&integrand, 0.0, ln2, 1e-10));
    for k in 1..halvings {
        let a = k as f64 * ln2;
        increments.push(integrate(&integrand, a, a + ln2, 1e-10));
    }
    let mut partial = Vec::with_capacity(increments.len());
    let mut acc = 0.0;
    for (k, inc) in increments.iter().enumerate() {
        acc += inc;
        partial.push((0.5f64.powi(k as i32 + 1), acc));
    }
    let n = increments.len();
    let last_increment_ratio = increments[n - 1] / increments[n - 2];

    let norm_ok = (norm_sq - norm_sq_exact).abs() <= NORM_TOL;
    let band_ok = band_ratio.is_finite() && band_ratio <= BAND_FACTOR;
    let divergent = last_increment_ratio.is_finite() && last_increment_ratio >= INCREMENT_FLOOR;
    Ok(BochnerReport {
        r,
        warning,
        norm_sq,
        norm_sq_exact,
        band,
        band_ratio,
        partial,
        increments,
        last_increment_ratio,
        norm_ok,
        band_ok,
        divergent,
        pass: norm_ok && band_ok && divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_matches_closed_form() {
        for r in [1.25, 1.5, 2.0, 3.0] {
            assert!((bochner_norm_sq(r).unwrap() - 1.0 / (r - 1.0)).abs() < 1e-9, "r={r}");
        }
        assert!(bochner_norm_sq(1.0).is_err());
        assert!(bochner_norm_sq(0.5).is_err());
    }

    #[test]
    fn inner_integral_against_direct_alpha_quadrature() {
        // moderate σ, where quadrature in α itself is reliable
        for (sigma, r) in [(0.25, 2.0), (0.05, 1.5)] {
            let f = |a: f64| a.powi(-3) * (-2.0 * sigma / a).exp() * (a.ln().abs() + 1.0).powf(-r);
            let direct = integrate_panels(&f, 1e-4, 1.0, 400, 1e-12);
            let g2 = bochner_g(sigma, r).powi(2);
            assert!((direct - g2).abs() < 1e-8 * g2, "σ={sigma}: {direct} vs {g2}");
        }
    }

    #[test]
    fn ratio_between_dyadic_scales() {
        // reference value computed independently with scipy quad
        let ratio = bochner_g(2f64.powi(-20), 2.0) / bochner_g(2f64.powi(-10), 2.0);
        assert!((ratio - 529.524_838_913_831_3).abs() < 1e-6, "{ratio}");
        let heuristic = 1024.0 * 11.0 / 21.0;
        assert!((ratio / heuristic - 1.0).abs() < 0.2);
        let ratio = bochner_g(2f64.powi(-20), 1.5) / bochner_g(2f64.powi(-10), 1.5);
        assert!((ratio - 625.849_627_991_659).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn r_outside_range() {
        assert!(matches!(bochner_counterexample(1.0, &[0.5], 4), Err(Error::Parameter(_))));
        let r = bochner_counterexample(2.5, &[0.5, 0.25], 4).unwrap();
        assert!(r.warning.is_some());
    }
}
