//! Variation-of-constants solution of `(d/dt)(Ay) + y = f` for `f` given as a
//! piecewise-linear trajectory and extended by zero outside its grid.
//!
//! Per mode the solution is the convolution of `f` with the kernel
//! `α^{-1} e^{-s/α}` (stable modes, causal) or its mirror image (unstable
//! modes, anti-causal). On each linear segment of `f` the convolution integral
//! is evaluated in closed form, which keeps the quadrature exact for kernels
//! of any stiffness. Center modes return `f` itself.

use crate::error::{Error, Result};
use crate::spectral::{HVec, SpectrumSpec, SubspaceTag};
use crate::trajectory::Trajectory;

/// Spectral cutoff `a > 0`: modes with `0 < |α| < a` are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParam {
    a: f64,
}

impl CutoffParam {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Parameter(format!("spectral cutoff must be positive, got {a}")));
        }
        Ok(CutoffParam { a })
    }

    pub fn value(&self) -> f64 {
        self.a
    }

    /// Cutoff that keeps every nonzero mode of `spec`.
    pub fn below(spec: &SpectrumSpec) -> Self {
        CutoffParam { a: spec.min_abs_nonzero().unwrap_or(1.0) * 0.5 }
    }

    fn keeps(&self, alpha: f64) -> bool {
        alpha == 0.0 || alpha.abs() >= self.a
    }
}

/// Exact segment weights for a kernel `β^{-1} e^{-u/β}` over a segment of
/// length `h`: returns `(E, w_far, w_near)` with `E = e^{-h/β}`, so that
/// `y_near = E y_far + w_far f_far + w_near f_near`.
pub(crate) fn segment_weights(h: f64, beta: f64) -> (f64, f64, f64) {
    let z = h / beta;
    let e = (-z).exp();
    // φ1(z) = (1 - e^{-z}) / z
    let phi1 = if z < 1e-8 { 1.0 - 0.5 * z } else { -(-z).exp_m1() / z };
    (e, phi1 - e, 1.0 - phi1)
}

/// Precomputed segment weights for one spectrum and one grid.
#[derive(Debug, Clone)]
pub struct VocPlan {
    alphas: Vec<f64>,
    keep: Vec<bool>,
    times: Vec<f64>,
    /// `weights[j][m]` for the segment `[t_m, t_{m+1}]`.
    weights: Vec<Vec<(f64, f64, f64)>>,
}

impl VocPlan {
    pub fn new(spec: &SpectrumSpec, times: &[f64], cutoff: Option<CutoffParam>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Parameter("variation-of-constants grid needs two or more nodes".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("grid must be strictly increasing".into()));
        }
        let alphas = spec.alphas().to_vec();
        let keep = alphas.iter().map(|a| cutoff.is_none_or(|c| c.keeps(*a))).collect();
        let weights = alphas
            .iter()
            .map(|a| {
                if *a == 0.0 {
                    Vec::new()
                } else {
                    times.windows(2).map(|w| segment_weights(w[1] - w[0], a.abs())).collect()
                }
            })
            .collect();
        Ok(VocPlan { alphas, keep, times: times.to_vec(), weights })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Solution values at the plan's nodes for forcing values `f` at the nodes.
    pub fn apply(&self, f: &[HVec]) -> Result<Vec<HVec>> {
        let m_nodes = self.times.len();
        if f.len() != m_nodes {
            return Err(Error::Parameter(format!("forcing has {} samples, grid has {m_nodes}", f.len())));
        }
        let n = self.alphas.len();
        if let Some(v) = f.iter().find(|v| v.len() != n) {
            return Err(Error::Dimension { expected: n, found: v.len() });
        }
        let mut out = vec![HVec::zeros(n); m_nodes];
        for j in 0..n {
            let alpha = self.alphas[j];
            if !self.keep[j] {
                continue;
            }
            match SubspaceTag::of(alpha) {
                SubspaceTag::Center => {
                    for m in 0..m_nodes {
                        out[m][j] = f[m][j];
                    }
                }
                SubspaceTag::Stable => {
                    let mut y = 0.0;
                    for m in 0..m_nodes - 1 {
                        let (e, w_far, w_near) = self.weights[j][m];
                        y = e * y + w_far * f[m][j] + w_near * f[m + 1][j];
                        out[m + 1][j] = y;
                    }
                }
                SubspaceTag::Unstable => {
                    let mut y = 0.0;
                    for m in (0..m_nodes - 1).rev() {
                        let (e, w_far, w_near) = self.weights[j][m];
                        y = e * y + w_far * f[m + 1][j] + w_near * f[m][j];
                        out[m][j] = y;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Variation-of-constants solution with spectral cutoff, on `f`'s grid.
pub fn solve_voc(spec: &SpectrumSpec, f: &Trajectory, cutoff: CutoffParam) -> Result<Trajectory> {
    solve_with(spec, f, Some(cutoff))
}

/// The `a → 0⁺` limit of [`solve_voc`]: at finite dimension the cutoff is
/// inactive once `a` drops below the smallest nonzero `|α|`.
pub fn solve_particular(spec: &SpectrumSpec, f: &Trajectory) -> Result<Trajectory> {
    solve_with(spec, f, None)
}

fn solve_with(spec: &SpectrumSpec, f: &Trajectory, cutoff: Option<CutoffParam>) -> Result<Trajectory> {
    spec.check(&f.values()[0])?;
    let plan = VocPlan::new(spec, f.times(), cutoff)?;
    let values = plan.apply(f.values())?;
    Trajectory::new(f.times().to_vec(), values)
}

/// Evaluate the variation-of-constants solution at arbitrary `times`
/// (inside, before, or after `f`'s support).
pub fn solve_voc_at(
    spec: &SpectrumSpec,
    f: &Trajectory,
    cutoff: Option<CutoffParam>,
    times: &[f64],
) -> Result<Trajectory> {
    spec.check(&f.values()[0])?;
    let plan = VocPlan::new(spec, f.times(), cutoff)?;
    let nodes = plan.apply(f.values())?;
    let grid = f.times();
    let (t_start, t_end) = (f.start(), f.end());
    let n = spec.dim();
    let values = times
        .iter()
        .map(|&t| {
            let mut out = HVec::zeros(n);
            let ft = f.eval(t);
            let cell = locate(grid, t);
            for j in 0..n {
                let alpha = spec.alphas()[j];
                if !plan.keep[j] {
                    continue;
                }
                out[j] = match SubspaceTag::of(alpha) {
                    SubspaceTag::Center => ft.as_ref().map_or(0.0, |v| v[j]),
                    SubspaceTag::Stable => {
                        if t <= t_start {
                            0.0
                        } else if t >= t_end {
                            decay(t - t_end, alpha) * nodes[grid.len() - 1][j]
                        } else {
                            let m = cell;
                            let (e, w_far, w_near) = segment_weights(t - grid[m], alpha);
                            e * nodes[m][j] + w_far * f.values()[m][j] + w_near * ft.as_ref().unwrap()[j]
                        }
                    }
                    SubspaceTag::Unstable => {
                        if t >= t_end {
                            0.0
                        } else if t <= t_start {
                            decay(t_start - t, -alpha) * nodes[0][j]
                        } else {
                            let m = cell;
                            let (e, w_far, w_near) = segment_weights(grid[m + 1] - t, -alpha);
                            e * nodes[m + 1][j] + w_far * f.values()[m + 1][j] + w_near * ft.as_ref().unwrap()[j]
                        }
                    }
                };
            }
            out
        })
        .collect();
    Trajectory::new(times.to_vec(), values)
}

fn decay(dt: f64, beta: f64) -> f64 {
    let z = dt / beta;
    if z > 745.0 {
        0.0
    } else {
        (-z).exp()
    }
}

/// Cell index `m` with `grid[m] <= t < grid[m+1]`, clamped to valid cells.
fn locate(grid: &[f64], t: f64) -> usize {
    let last = grid.len() - 2;
    match grid.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(last),
        Err(i) => i.saturating_sub(1).min(last),
    }
}
