//! Time-sampled `H`-valued functions with the piecewise-linear interpretation,
//! plus the time grids the solvers run on.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectral::HVec;

/// Samples of `x(t)` on a strictly increasing grid. Between nodes the
/// function is the linear interpolant; norms are exact integrals of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<HVec>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<HVec>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Parameter("trajectory needs at least one sample".into()));
        }
        if times.len() != values.len() {
            return Err(Error::Parameter(format!("trajectory has {} times but {} values", times.len(), values.len())));
        }
        check_grid(&times)?;
        let n = values[0].len();
        for v in &values {
            if v.len() != n {
                return Err(Error::Dimension { expected: n, found: v.len() });
            }
            if !v.is_finite() {
                return Err(Error::Parameter("trajectory values must be finite".into()));
            }
        }
        Ok(Trajectory { times, values })
    }

    pub fn from_fn(times: &[f64], mut f: impl FnMut(f64) -> HVec) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times.to_vec(), values)
    }

    pub fn zeros(times: &[f64], dim: usize) -> Result<Self> {
        Self::from_fn(times, |_| HVec::zeros(dim))
    }

    /// Scalar trajectory (dimension one) from a function of time.
    pub fn scalar(times: &[f64], mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::from_fn(times, |t| HVec(vec![f(t)]))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[HVec] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Coordinate `j` as a plain series.
    pub fn coord(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[j]).collect()
    }

    pub fn map(&self, mut f: impl FnMut(f64, &HVec) -> HVec) -> Result<Trajectory> {
        let values = self.times.iter().zip(&self.values).map(|(t, v)| f(*t, v)).collect();
        Trajectory::new(self.times.clone(), values)
    }

    /// Index `m` of the cell `[t_m, t_{m+1}]` containing `t` (clamped).
    fn cell_of(&self, t: f64) -> usize {
        let n = self.times.len();
        if n < 2 {
            return 0;
        }
        match self.times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Linear interpolation at `t`; `None` outside `[start, end]`.
    pub fn eval(&self, t: f64) -> Option<HVec> {
        if t < self.start() || t > self.end() {
            return None;
        }
        if self.len() == 1 {
            return Some(self.values[0].clone());
        }
        let m = self.cell_of(t);
        let (ta, tb) = (self.times[m], self.times[m + 1]);
        let s = (t - ta) / (tb - ta);
        Some(self.values[m].scale(1.0 - s).axpy(s, &self.values[m + 1]))
    }

    /// Linear interpolation with `x = 0` outside the sampled interval.
    pub fn eval_zero_ext(&self, t: f64) -> HVec {
        self.eval(t).unwrap_or_else(|| HVec::zeros(self.dim()))
    }

    /// `∫_a^b |x|^2` of the interpolant over `[a, b] ∩ [start, end]`.
    pub fn l2_sq_between(&self, a: f64, b: f64) -> f64 {
        let lo = a.max(self.start());
        let hi = b.min(self.end());
        if !(hi > lo) || self.len() < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for m in self.cell_of(lo)..self.len() - 1 {
            let (ta, tb) = (self.times[m], self.times[m + 1]);
            if ta >= hi {
                break;
            }
            let ca = ta.max(lo);
            let cb = tb.min(hi);
            if cb <= ca {
                continue;
            }
            let va = if ca == ta { self.values[m].clone() } else { self.eval(ca).unwrap() };
            let vb = if cb == tb { self.values[m + 1].clone() } else { self.eval(cb).unwrap() };
            total += segment_sq(&va, &vb, cb - ca);
        }
        total
    }

    /// `∫_a^b x` of the interpolant over `[a, b] ∩ [start, end]`.
    pub fn integral_between(&self, a: f64, b: f64) -> HVec {
        let lo = a.max(self.start());
        let hi = b.min(self.end());
        let mut total = HVec::zeros(self.dim());
        if !(hi > lo) || self.len() < 2 {
            return total;
        }
        for m in self.cell_of(lo)..self.len() - 1 {
            let (ta, tb) = (self.times[m], self.times[m + 1]);
            if ta >= hi {
                break;
            }
            let ca = ta.max(lo);
            let cb = tb.min(hi);
            if cb <= ca {
                continue;
            }
            let va = self.eval(ca).unwrap();
            let vb = self.eval(cb).unwrap();
            total = total.axpy(0.5 * (cb - ca), &(&va + &vb));
        }
        total
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut total = 0.0;
        for m in 0..self.len().saturating_sub(1) {
            total += segment_sq(&self.values[m], &self.values[m + 1], self.times[m + 1] - self.times[m]);
        }
        total
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `∫_{t_m}^{end} |x|^2` at every node.
    pub fn tail_l2_sq(&self) -> Vec<f64> {
        let n = self.len();
        let mut tails = vec![0.0; n];
        for m in (0..n.saturating_sub(1)).rev() {
            tails[m] =
                tails[m + 1] + segment_sq(&self.values[m], &self.values[m + 1], self.times[m + 1] - self.times[m]);
        }
        tails
    }

    /// `∫ |x|^4` of the interpolant. `|x|^4` is a quartic on every cell, so
    /// three-point Gauss–Legendre is exact.
    pub fn l4_norm_pow4(&self) -> f64 {
        const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut total = 0.0;
        for m in 0..self.len().saturating_sub(1) {
            let h = self.times[m + 1] - self.times[m];
            let (a, b) = (&self.values[m], &self.values[m + 1]);
            for (x, w) in NODES.iter().zip(WEIGHTS) {
                let s = 0.5 * (x + 1.0);
                let q = a.scale(1.0 - s).axpy(s, b).norm_sq();
                total += 0.5 * h * w * q * q;
            }
        }
        total
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `‖self - other‖_{L²}` for trajectories on the same grid.
    pub fn distance_l2(&self, other: &Trajectory) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::Parameter("trajectories live on different grids".into()));
        }
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        let mut total = 0.0;
        for m in 0..self.len().saturating_sub(1) {
            let da = &self.values[m] - &other.values[m];
            let db = &self.values[m + 1] - &other.values[m + 1];
            total += segment_sq(&da, &db, self.times[m + 1] - self.times[m]);
        }
        Ok(total.sqrt())
    }

    pub fn add(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times != other.times {
            return Err(Error::Parameter("trajectories live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Trajectory::new(self.times.clone(), values)
    }

    /// Resample onto another grid (zero outside the sampled interval).
    pub fn resample(&self, times: &[f64]) -> Result<Trajectory> {
        Trajectory::from_fn(times, |t| self.eval_zero_ext(t))
    }

    /// Nodes lying in `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Trajectory> {
        let (times, values): (Vec<f64>, Vec<HVec>) = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= a && **t <= b)
            .map(|(t, v)| (*t, v.clone()))
            .unzip();
        Trajectory::new(times, values)
    }

    /// Spacing if the grid is uniform to relative tolerance `rel_tol`.
    pub fn uniform_spacing(&self, rel_tol: f64) -> Option<f64> {
        uniform_spacing(&self.times, rel_tol)
    }

    /// CSV with header `t,coeff_0,...` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for j in 0..self.dim() {
            write!(out, ",coeff_{j}").unwrap();
        }
        out.push('\n');
        for (t, v) in self.times.iter().zip(&self.values) {
            write!(out, "{}", fmt_f64(*t)).unwrap();
            for c in v.iter() {
                write!(out, ",{}", fmt_f64(*c)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parse the format written by [`Trajectory::to_csv`]; lines starting with
    /// `#` are ignored.
    pub fn from_csv(text: &str) -> Result<Trajectory> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line.starts_with('t') {
                    continue;
                }
            }
            let nums = parse_row(line).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            if nums.is_empty() {
                continue;
            }
            times.push(nums[0]);
            values.push(HVec(nums[1..].to_vec()));
        }
        Trajectory::new(times, values)
    }
}

/// `∫_0^h |a + (b-a) s/h|^2 ds`.
pub(crate) fn segment_sq(a: &HVec, b: &HVec, h: f64) -> f64 {
    h / 3.0 * (a.norm_sq() + a.dot(b) + b.norm_sq())
}

pub(crate) fn parse_row(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"))).collect()
}

/// Full-precision (17 significant digit) decimal rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Parameter("grid times must be finite".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("grid must be strictly increasing".into()));
    }
    Ok(())
}

pub(crate) fn uniform_spacing(times: &[f64], rel_tol: f64) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= rel_tol * h).then_some(h)
}

/// `m` equal cells on `[a, b]` (so `m + 1` nodes).
pub fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    let h = (b - a) / m as f64;
    (0..=m).map(|i| if i == m { b } else { a + i as f64 * h }).collect()
}

/// Grid on `[0, t_end]`: a uniform head of `head_cells` cells on
/// `[0, t_min]`, then geometric nodes `t_end * theta^k` down to `t_min`.
pub fn geometric_grid(t_end: f64, theta: f64, t_min: f64, head_cells: usize) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("grid ratio theta must lie in (0,1), got {theta}")));
    }
    if !(t_min > 0.0 && t_min < t_end) {
        return Err(Error::Parameter(format!("need 0 < t_min < T, got t_min={t_min}, T={t_end}")));
    }
    let mut geo = Vec::new();
    let mut t = t_end;
    while t > t_min * (1.0 + 1e-12) {
        geo.push(t);
        t *= theta;
    }
    geo.push(t_min);
    geo.reverse();
    let head = head_cells.max(1);
    let mut grid: Vec<f64> = (0..head).map(|i| t_min * i as f64 / head as f64).collect();
    grid.extend(geo);
    Ok(grid)
}

/// Insert `factor - 1` equally spaced nodes into every cell.
pub fn refine_grid(times: &[f64], factor: usize) -> Vec<f64> {
    let factor = factor.max(1);
    let mut out = Vec::with_capacity((times.len() - 1) * factor + 1);
    for w in times.windows(2) {
        for k in 0..factor {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / factor as f64);
        }
    }
    out.push(*times.last().unwrap());
    out
}
