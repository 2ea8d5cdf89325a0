//! The bi-stable semigroups `T_s(t) = χ(α>0) e^{-t/α}` (forward, `t >= 0`)
//! and `T_u(t) = χ(α<0) e^{-t/α}` (backward, `t <= 0`), and the smoothing
//! compositions `|A|^{-r} T(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{HVec, SpectrumSpec, SubspaceTag};

/// Arguments of `exp` below this are flushed to exactly zero.
const EXP_FLOOR: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Stable,
    Unstable,
}

impl Direction {
    fn tag(self) -> SubspaceTag {
        match self {
            Direction::Stable => SubspaceTag::Stable,
            Direction::Unstable => SubspaceTag::Unstable,
        }
    }
}

/// A time, a smoothing order `r >= 0` and the direction of propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupQuery {
    pub t: f64,
    pub r: f64,
    pub direction: Direction,
}

impl SemigroupQuery {
    pub fn stable(t: f64) -> Self {
        SemigroupQuery { t, r: 0.0, direction: Direction::Stable }
    }

    pub fn unstable(t: f64) -> Self {
        SemigroupQuery { t, r: 0.0, direction: Direction::Unstable }
    }

    pub fn with_order(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::Parameter(format!("invalid semigroup query {self:?}")));
        }
        let wrong_sign = match self.direction {
            Direction::Stable => self.t < 0.0,
            Direction::Unstable => self.t > 0.0,
        };
        if wrong_sign {
            return Err(Error::Parameter(format!(
                "{:?} semigroup is only defined for {} time, got t = {}",
                self.direction,
                if self.direction == Direction::Stable { "nonnegative" } else { "nonpositive" },
                self.t
            )));
        }
        if self.r > 0.0 && self.t == 0.0 {
            return Err(Error::Unbounded(format!("|A|^-{} T(0) is unbounded; smoothing needs t != 0", self.r)));
        }
        Ok(())
    }
}

/// Per-mode multiplier `|α|^{-r} e^{-t/α}` on the tagged subspace, zero
/// elsewhere. Evaluated in log form so tiny `|α|` cannot overflow.
pub(crate) fn mode_factor(alpha: f64, t: f64, r: f64, direction: Direction) -> f64 {
    if SubspaceTag::of(alpha) != direction.tag() {
        return 0.0;
    }
    let expo = -t / alpha - r * alpha.abs().ln();
    if expo < EXP_FLOOR {
        0.0
    } else {
        expo.exp()
    }
}

/// `T_s(t) h` or `T_u(t) h`; the query must have `r = 0`.
pub fn apply_semigroup(spec: &SpectrumSpec, q: SemigroupQuery, h: &HVec) -> Result<HVec> {
    spec.check(h)?;
    q.validate()?;
    if q.r != 0.0 {
        return Err(Error::Parameter("apply_semigroup expects r = 0; use apply_smoothing".into()));
    }
    Ok(HVec(spec.alphas().iter().zip(h.iter()).map(|(a, x)| mode_factor(*a, q.t, 0.0, q.direction) * x).collect()))
}

/// `|A|^{-r} T(t) h` for `r > 0`.
pub fn apply_smoothing(spec: &SpectrumSpec, q: SemigroupQuery, h: &HVec) -> Result<HVec> {
    spec.check(h)?;
    q.validate()?;
    if !(q.r > 0.0) {
        return Err(Error::Parameter("apply_smoothing expects r > 0".into()));
    }
    Ok(HVec(spec.alphas().iter().zip(h.iter()).map(|(a, x)| mode_factor(*a, q.t, q.r, q.direction) * x).collect()))
}

/// k-th time derivative of `t ↦ T(t) h`, i.e. `(-A^{-1})^k T(t) h`.
pub fn semigroup_derivative(spec: &SpectrumSpec, q: SemigroupQuery, k: u32, h: &HVec) -> Result<HVec> {
    spec.check(h)?;
    q.validate()?;
    if k > 0 && q.t == 0.0 {
        return Err(Error::Unbounded("derivatives of T(t) at t = 0 are unbounded".into()));
    }
    Ok(HVec(
        spec.alphas()
            .iter()
            .zip(h.iter())
            .map(|(a, x)| {
                let sign = if *a > 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                sign * mode_factor(*a, q.t, k as f64, q.direction) * x
            })
            .collect(),
    ))
}

/// `C(r) = sup_{z>0} z^{-r} e^{-1/z} = r^r e^{-r}` (with `C(0) = 1`), the
/// constant in `‖|A|^{-r} T_s(t)‖ <= C(r) t^{-r}`.
pub fn smoothing_constant(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        (r * r.ln() - r).exp()
    }
}

/// One row of a sharpness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    /// `sup_{‖h‖=1} ‖|A|^{-r} T_s(t) h‖ = max_{α_j>0} α_j^{-r} e^{-t/α_j}`.
    pub sup_norm: f64,
    /// `C(r) t^{-r}`.
    pub predicted: f64,
    pub ratio: f64,
}

/// Operator norm of `|A|^{-r} T_s(t)` against its predicted bound on each `t`.
pub fn sharp_bound_scan(spec: &SpectrumSpec, r: f64, t_grid: &[f64]) -> Result<Vec<ScanRow>> {
    if spec.count(SubspaceTag::Stable) == 0 {
        return Err(Error::Model("sharpness scan needs a nonempty stable spectrum".into()));
    }
    if !(r >= 0.0) {
        return Err(Error::Parameter(format!("order r must be >= 0, got {r}")));
    }
    let c = smoothing_constant(r);
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::Parameter(format!("scan times must be positive, got {t}")));
            }
            let sup_norm = spec.alphas().iter().map(|a| mode_factor(*a, t, r, Direction::Stable)).fold(0.0, f64::max);
            let predicted = c * t.powf(-r);
            Ok(ScanRow { t, sup_norm, predicted, ratio: sup_norm / predicted })
        })
        .collect()
}

/// Dyadic time grid `2^lo, 2^{lo+1}, ..., 2^hi`.
pub fn dyadic_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}
