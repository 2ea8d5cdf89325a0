//! Small-time blow-up and large-time decay of time derivatives, and the
//! sharpness probe along a spectral ladder.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, loglog_slope_trimmed, LineFit};
use crate::semigroup::{semigroup_derivative, sharp_bound_scan, SemigroupQuery};
use crate::spectral::{HVec, SpectrumSpec, SubspaceTag};
use crate::trajectory::Trajectory;

/// Minimum number of dyadic sample points in the small-time window.
pub const MIN_SAMPLES: usize = 8;

/// Sample window: `t = 2^e` for `lo_exp <= e <= hi_exp`, and the large-time
/// fit on `[large_t_start, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayWindow {
    pub lo_exp: i32,
    pub hi_exp: i32,
    pub large_t_start: f64,
}

impl Default for DecayWindow {
    fn default() -> Self {
        DecayWindow { lo_exp: -12, hi_exp: -4, large_t_start: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub k: usize,
    /// `(t, |x^{(k)}(t)|)` at the dyadic sample points.
    pub samples: Vec<(f64, f64)>,
    /// Log-log fit over the samples with the endpoints dropped.
    pub small_t: LineFit,
    pub small_t_slope: f64,
    /// `C` in `|x^{(k)}(t)| ≈ C t^{slope}`.
    pub small_t_constant: f64,
    /// `c` in `|x^{(k)}(t)| ≈ C' e^{-c t}` on `[large_t_start, T]`, if enough
    /// nonzero samples exist there.
    pub large_t_rate: Option<f64>,
    pub large_t_constant: Option<f64>,
    pub large_t_rms: Option<f64>,
}

/// Stencil of `k + 1` consecutive nodes around `t` (nearest node in the middle).
fn stencil(times: &[f64], t: f64, k: usize) -> Option<usize> {
    let n = times.len();
    if n < k + 1 || t < times[0] || t > times[n - 1] {
        return None;
    }
    let nearest = match times.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => {
            if i == 0 {
                0
            } else if i == n || (t - times[i - 1]) <= (times[i] - t) {
                i - 1
            } else {
                i
            }
        }
    };
    Some(nearest.saturating_sub(k / 2).min(n - 1 - k))
}

/// `k!` times the k-th Newton divided difference on nodes `first..=first+k`.
fn divided_difference(x: &Trajectory, first: usize, k: usize) -> HVec {
    let t = &x.times()[first..=first + k];
    let mut table: Vec<HVec> = x.values()[first..=first + k].to_vec();
    for level in 1..=k {
        for i in 0..=k - level {
            let d = &table[i + 1] - &table[i];
            table[i] = d.scale(1.0 / (t[i + level] - t[i]));
        }
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    table[0].scale(factorial)
}

/// `|x^{(k)}(t)|` at each `t` by divided differences. Fails with an
/// "insufficient grid" parameter error when a stencil is wider than `t/2`
/// or `t` is outside the grid.
pub fn derivative_samples(x: &Trajectory, k: usize, ts: &[f64]) -> Result<Vec<f64>> {
    ts.iter()
        .map(|&t| {
            let first = stencil(x.times(), t, k)
                .ok_or_else(|| Error::Parameter(format!("insufficient grid: t = {t:.3e} not covered for k = {k}")))?;
            let spread = x.times()[first + k] - x.times()[first];
            if k > 0 && spread > 0.5 * t {
                return Err(Error::Parameter(format!(
                    "insufficient grid: stencil for k = {k} at t = {t:.3e} spans {spread:.3e} > t/2"
                )));
            }
            Ok(divided_difference(x, first, k).norm())
        })
        .collect()
}

/// Fitted small-time slope and large-time rate of `|x^{(k)}|` for `k = 1..=k_max`.
pub fn decay_fit(x: &Trajectory, k_max: usize, window: DecayWindow) -> Result<Vec<DecayReport>> {
    if k_max == 0 {
        return Err(Error::Parameter("k_max must be at least 1".into()));
    }
    if window.hi_exp < window.lo_exp || ((window.hi_exp - window.lo_exp + 1) as usize) < MIN_SAMPLES {
        return Err(Error::Parameter(format!(
            "the dyadic window 2^{}..2^{} has fewer than {MIN_SAMPLES} points",
            window.lo_exp, window.hi_exp
        )));
    }
    let ts: Vec<f64> = (window.lo_exp..=window.hi_exp).map(|e| 2f64.powi(e)).collect();
    (1..=k_max)
        .map(|k| {
            let norms = derivative_samples(x, k, &ts)?;
            if norms.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Parameter(format!("derivative of order {k} vanishes in the window")));
            }
            let small_t = loglog_slope_trimmed(&ts, &norms)?;

            let times = x.times();
            let mut lt = Vec::new();
            let mut ly = Vec::new();
            for (i, &t) in times.iter().enumerate() {
                if t < window.large_t_start || i + k >= times.len() {
                    continue;
                }
                let v = divided_difference(x, i, k).norm();
                if v > 0.0 && v.is_finite() {
                    lt.push(times[i..=i + k].iter().sum::<f64>() / (k + 1) as f64);
                    ly.push(v.ln());
                }
            }
            let large = if lt.len() >= 3 { linear_fit(&lt, &ly).ok() } else { None };
            Ok(DecayReport {
                k,
                samples: ts.iter().copied().zip(norms).collect(),
                small_t_slope: small_t.slope,
                small_t_constant: small_t.intercept.exp(),
                small_t,
                large_t_rate: large.map(|f| -f.slope),
                large_t_constant: large.map(|f| f.intercept.exp()),
                large_t_rms: large.map(|f| f.rms_residual),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SharpnessRow {
    /// Index of the ladder mode.
    pub n: usize,
    /// `t = a_n`.
    pub t: f64,
    /// `|x^{(k)}(a_n)|` for `x(t) = T_s(t) e_n`.
    pub derivative_norm: f64,
    /// `|x^{(k)}(a_n)| a_n^k`.
    pub ratio: f64,
    /// `a_n^k sup_j a_j^{-k} e^{-a_n/a_j}`, the operator-norm ratio at `t = a_n`.
    pub sup_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub k: u32,
    pub rows: Vec<SharpnessRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `e^{-1}`, the value at the maximiser `z = t`.
    pub constant_at_t: f64,
    /// `(k/e)^k`, the value at the maximiser `z = t/k`.
    pub constant_at_t_over_k: f64,
}

/// Probe `|x^{(k)}(a_n)|` against `a_n^{-k}` along every stable mode.
pub fn sharpness_probe(spec: &SpectrumSpec, k: u32) -> Result<SharpnessReport> {
    let stable: Vec<usize> = spec.indices(SubspaceTag::Stable).collect();
    if stable.is_empty() {
        return Err(Error::Model("sharpness probe needs a stable ladder".into()));
    }
    let mut rows = Vec::with_capacity(stable.len());
    for &n in &stable {
        let t = spec.alphas()[n];
        let e_n = HVec::unit(spec.dim(), n);
        let derivative_norm = semigroup_derivative(spec, SemigroupQuery::stable(t), k, &e_n)?.norm();
        let scan = sharp_bound_scan(spec, k as f64, &[t])?;
        let tk = t.powi(k as i32);
        rows.push(SharpnessRow {
            n,
            t,
            derivative_norm,
            ratio: derivative_norm * tk,
            sup_ratio: scan[0].sup_norm * tk,
        });
    }
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let kf = k as f64;
    Ok(SharpnessReport {
        k,
        rows,
        min_ratio,
        max_ratio,
        constant_at_t: (-1f64).exp(),
        constant_at_t_over_k: if k == 0 { 1.0 } else { (kf / std::f64::consts::E).powf(kf) },
    })
}
