//! Dissipation of `⟨Ax, x⟩`, `L²` tails, and the integral inequalities built
//! on `F' <= -F² g + f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::Inequality;
use crate::spectral::SpectrumSpec;
use crate::trajectory::{segment_sq, Trajectory};

/// Relative slack on the exponential bounds.
pub const DECAY_TOL: f64 = 1e-3;
/// Relative per-cell slack when checking a differential inequality from
/// samples.
pub const PRECONDITION_REL_TOL: f64 = 1e-2;
/// Cells are also allowed this fraction of the whole problem's scale.
pub const PRECONDITION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct QuadformReport {
    pub times: Vec<f64>,
    /// `⟨Ax, x⟩(t_m)`.
    pub values: Vec<f64>,
    /// Largest per-cell monotonicity tolerance `10 h² sup|x|²`.
    pub tol_mono: f64,
    pub monotone_violations: usize,
    /// Largest `q_{m+1} - q_m` beyond tolerance (0 if none).
    pub max_excess: f64,
    /// Tightest instance of `q(t) <= e^{-t} q(0) (1 + tol)`.
    pub decay: Inequality,
    /// Tightest instance of `-tol <= q(t)`.
    pub nonnegative: Inequality,
    pub pass: bool,
}

/// `⟨Ax, x⟩` along `x`, for data normalised to `‖A‖ <= 1`, `sup|x| <= 1`.
pub fn quadratic_form_series(spec: &SpectrumSpec, x: &Trajectory) -> Result<QuadformReport> {
    spec.check(&x.values()[0])?;
    if spec.norm_bound() > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("needs ‖A‖ <= 1, got {}", spec.norm_bound())));
    }
    let sup = x.sup_norm();
    if sup > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("needs sup|x| <= 1, got {sup}")));
    }
    let t = x.times();
    let values: Vec<f64> =
        x.values().iter().map(|v| spec.alphas().iter().zip(v.iter()).map(|(a, c)| a * c * c).sum()).collect();
    let cell_tol: Vec<f64> = t.windows(2).map(|w| 10.0 * (w[1] - w[0]).powi(2) * sup * sup).collect();
    // tolerance at a node: the larger of its neighbouring cells
    let node_tol = |m: usize| {
        let left = if m > 0 { cell_tol[m - 1] } else { 0.0 };
        let right = cell_tol.get(m).copied().unwrap_or(0.0);
        left.max(right)
    };

    let mut monotone_violations = 0;
    let mut max_excess: f64 = 0.0;
    for m in 0..values.len().saturating_sub(1) {
        let excess = values[m + 1] - values[m] - cell_tol[m];
        if !(excess <= 0.0) {
            monotone_violations += 1;
            max_excess = max_excess.max(excess);
        }
    }
    let q0 = values[0];
    let worst = |ineqs: Vec<Inequality>| {
        ineqs
            .into_iter()
            .min_by(|a, b| {
                let key = |i: &Inequality| if i.holds { i.margin } else { f64::NEG_INFINITY };
                key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap()
    };
    let decay = worst(
        (0..values.len())
            .map(|m| {
                let bound = (-(t[m] - t[0])).exp() * q0 * (1.0 + DECAY_TOL);
                Inequality::with_tol(values[m], bound, node_tol(m))
            })
            .collect(),
    );
    let nonnegative = worst((0..values.len()).map(|m| Inequality::with_tol(0.0, values[m], node_tol(m))).collect());
    let pass = monotone_violations == 0 && decay.holds && nonnegative.holds;
    Ok(QuadformReport {
        times: t.to_vec(),
        values,
        tol_mono: cell_tol.iter().copied().fold(0.0, f64::max),
        monotone_violations,
        max_excess,
        decay,
        nonnegative,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub times: Vec<f64>,
    /// `∫_{t_m}^T |x|²`.
    pub tails: Vec<f64>,
    /// Tightest instance of `tail(t) <= e^{-t} (1 + tol)`.
    pub bound: Inequality,
    pub nonincreasing: bool,
    pub pass: bool,
}

pub fn l2_tail_series(x: &Trajectory) -> TailReport {
    let t = x.times();
    let tails = x.tail_l2_sq();
    let bound = tails
        .iter()
        .zip(t)
        .map(|(tail, tm)| Inequality::new(*tail, (-(tm - t[0])).exp() * (1.0 + DECAY_TOL)))
        .min_by(|a, b| {
            let key = |i: &Inequality| if i.holds { i.margin } else { f64::NEG_INFINITY };
            key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let nonincreasing = tails.windows(2).all(|w| w[1] <= w[0]);
    TailReport { times: t.to_vec(), pass: bound.holds && nonincreasing, tails, bound, nonincreasing }
}

/// One conclusion instance on `(t', t)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairCheck {
    pub t_prime: f64,
    pub t: f64,
    pub check: Inequality,
}

#[derive(Debug, Clone, Serialize)]
pub struct TechcorReport {
    /// The sampled triple satisfies `(d/dt)⟨h,y⟩ <= -|y|² + f` and `⟨h,y⟩(T) >= 0`.
    pub precondition_ok: bool,
    /// Largest cell excess in the differential inequality.
    pub precondition_defect: f64,
    pub precondition_message: Option<String>,
    /// `⟨h,y⟩(t) <= ∫_{t'}^t f + ∫_{t'}^t |h|² / (t - t')²`.
    pub pointwise: Vec<PairCheck>,
    /// `∫_t^T |y|² <= ∫_{t'}^T f + ∫_{t'}^t |h|² / (t - t')²`.
    pub tail: Vec<PairCheck>,
    pub pass: bool,
}

fn check_pairs(start: f64, end: f64, pairs: &[(f64, f64)]) -> Result<()> {
    for &(tp, t) in pairs {
        if !(start <= tp && tp < t && t <= end) {
            return Err(Error::Parameter(format!("pair ({tp}, {t}) must satisfy {start} <= t' < t <= {end}")));
        }
    }
    Ok(())
}

fn scalar_series(times: &[f64], v: &[f64]) -> Result<Trajectory> {
    Trajectory::new(times.to_vec(), v.iter().map(|x| vec![*x].into()).collect())
}

/// Largest excess of `ΔF` over the integrated right-hand side, per cell
/// `(ΔF, rhs, |sink| + |source|)`, beyond the per-cell and global slack.
fn cell_defect(cells: &[(f64, f64, f64)], big_f: &[f64]) -> f64 {
    let global = big_f.iter().map(|v| v.abs()).fold(0.0, f64::max) + cells.iter().map(|c| c.2).sum::<f64>();
    cells
        .iter()
        .map(|(lhs, rhs, mass)| lhs - rhs - PRECONDITION_REL_TOL * (lhs.abs() + mass) - PRECONDITION_FLOOR * global)
        .fold(0.0, f64::max)
}

/// Relative tolerance for comparing two quadratures of the same quantities.
const QUAD_TOL: f64 = 1e-10;

pub fn techcor_check(h: &Trajectory, y: &Trajectory, f: &[f64], pairs: &[(f64, f64)]) -> Result<TechcorReport> {
    if h.times() != y.times() {
        return Err(Error::Parameter("h and y must share a grid".into()));
    }
    if h.dim() != y.dim() {
        return Err(Error::Dimension { expected: h.dim(), found: y.dim() });
    }
    if f.len() != y.len() {
        return Err(Error::Parameter(format!("f has {} samples, grid has {}", f.len(), y.len())));
    }
    if f.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Parameter("f must be nonnegative".into()));
    }
    check_pairs(y.start(), y.end(), pairs)?;
    let t = y.times();
    let big_f: Vec<f64> = h.values().iter().zip(y.values()).map(|(a, b)| a.dot(b)).collect();

    let mut cells = Vec::with_capacity(t.len() - 1);
    for m in 0..t.len() - 1 {
        let dt = t[m + 1] - t[m];
        let y2 = segment_sq(&y.values()[m], &y.values()[m + 1], dt);
        let fi = 0.5 * dt * (f[m] + f[m + 1]);
        cells.push((big_f[m + 1] - big_f[m], fi - y2, y2 + fi));
    }
    let defect = cell_defect(&cells, &big_f);
    let f_end = *big_f.last().unwrap();
    let end_tol = PRECONDITION_REL_TOL * big_f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut message = None;
    if defect > 0.0 {
        message = Some(format!("differential inequality fails by {defect:.3e} on some cell"));
    } else if f_end < -end_tol {
        message = Some(format!("⟨h,y⟩(T) = {f_end:.3e} is negative"));
    }
    if message.is_some() {
        return Ok(TechcorReport {
            precondition_ok: false,
            precondition_defect: defect.max(0.0),
            precondition_message: message,
            pointwise: Vec::new(),
            tail: Vec::new(),
            pass: false,
        });
    }

    let f_traj = scalar_series(t, f)?;
    let big_f_traj = scalar_series(t, &big_f)?;
    let mut pointwise = Vec::new();
    let mut tail = Vec::new();
    for &(tp, tt) in pairs {
        let h2 = h.l2_sq_between(tp, tt) / (tt - tp).powi(2);
        let fi = f_traj.integral_between(tp, tt)[0];
        let lhs = big_f_traj.eval(tt).unwrap()[0];
        let rhs = fi + h2;
        pointwise.push(PairCheck {
            t_prime: tp,
            t: tt,
            check: Inequality::with_tol(lhs, rhs, QUAD_TOL * (lhs.abs() + rhs.abs())),
        });
        let lhs = y.l2_sq_between(tt, y.end());
        let rhs = f_traj.integral_between(tp, y.end())[0] + h2;
        tail.push(PairCheck {
            t_prime: tp,
            t: tt,
            check: Inequality::with_tol(lhs, rhs, QUAD_TOL * (lhs.abs() + rhs.abs())),
        });
    }
    let pass = pointwise.iter().chain(&tail).all(|p| p.check.holds);
    Ok(TechcorReport {
        precondition_ok: true,
        precondition_defect: 0.0,
        precondition_message: None,
        pointwise,
        tail,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TechlemReport {
    pub precondition_ok: bool,
    pub precondition_defect: f64,
    /// `F(t) <= ∫_{t'}^t f + (∫_{t'}^t g)^{-1}`.
    pub conclusions: Vec<PairCheck>,
    pub pass: bool,
}

/// Scalar series `F`, `f >= 0`, `g >= 0` on `times` with `F' <= -F² g + f`.
pub fn techlem_check(
    times: &[f64],
    big_f: &[f64],
    f: &[f64],
    g: &[f64],
    pairs: &[(f64, f64)],
) -> Result<TechlemReport> {
    let n = times.len();
    if n < 2 || big_f.len() != n || f.len() != n || g.len() != n {
        return Err(Error::Parameter("series must have equal length >= 2".into()));
    }
    if f.iter().chain(g).any(|v| !(*v >= 0.0)) {
        return Err(Error::Parameter("f and g must be nonnegative".into()));
    }
    let ff = Trajectory::scalar(times, |_| 0.0)?;
    check_pairs(ff.start(), ff.end(), pairs)?;
    let mut cells = Vec::with_capacity(n - 1);
    for m in 0..n - 1 {
        let dt = times[m + 1] - times[m];
        let sink = 0.5 * dt * (big_f[m].powi(2) * g[m] + big_f[m + 1].powi(2) * g[m + 1]);
        let source = 0.5 * dt * (f[m] + f[m + 1]);
        cells.push((big_f[m + 1] - big_f[m], source - sink, sink + source));
    }
    let defect = cell_defect(&cells, big_f);
    if defect > 0.0 {
        return Ok(TechlemReport {
            precondition_ok: false,
            precondition_defect: defect,
            conclusions: Vec::new(),
            pass: false,
        });
    }
    let (ft, gt, bft) = (scalar_series(times, f)?, scalar_series(times, g)?, scalar_series(times, big_f)?);
    let conclusions: Vec<PairCheck> = pairs
        .iter()
        .map(|&(tp, tt)| {
            let lhs = bft.eval(tt).unwrap()[0];
            let rhs = ft.integral_between(tp, tt)[0] + 1.0 / gt.integral_between(tp, tt)[0];
            PairCheck { t_prime: tp, t: tt, check: Inequality::with_tol(lhs, rhs, QUAD_TOL * (lhs.abs() + rhs.abs())) }
        })
        .collect();
    let pass = conclusions.iter().all(|c| c.check.holds);
    Ok(TechlemReport { precondition_ok: true, precondition_defect: 0.0, conclusions, pass })
}
