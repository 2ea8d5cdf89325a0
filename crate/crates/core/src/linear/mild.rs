//! Weak versus mild boundary data.
//!
//! Every finite-dimensional `g` lies in `Range |A|^{1/2}`, so the distinction
//! only shows up as growth of `‖|A|^{-1/2} g‖` when the spectral ladder is
//! refined.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{HVec, SpectrumSpec};

/// Relative growth of the last refinement step above which data is classified
/// as not mild.
pub const MILD_GROWTH_THRESHOLD: f64 = 1e-2;

/// `‖|A|^{-1/2} g‖`; center-supported data is outside the domain.
pub fn mild_defect(spec: &SpectrumSpec, g: &HVec) -> Result<f64> {
    Ok(spec.abs_power_inv(g, 0.5)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MildClass {
    Mild,
    NonMild,
}

#[derive(Debug, Clone, Serialize)]
pub struct MildSweep {
    pub dims: Vec<usize>,
    pub defects: Vec<f64>,
    /// `(d_{i+1} - d_i) / d_i` between consecutive levels.
    pub increments: Vec<f64>,
    pub class: MildClass,
}

/// Defects along a refinement sweep of `(spectrum, data)` pairs, classified
/// by the relative growth of the last step.
pub fn mild_sweep(levels: &[(SpectrumSpec, HVec)]) -> Result<MildSweep> {
    if levels.len() < 2 {
        return Err(Error::Parameter("a refinement sweep needs two or more levels".into()));
    }
    let defects = levels.iter().map(|(s, g)| mild_defect(s, g)).collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = defects
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (w[1] - w[0]) / w[0]
            }
        })
        .collect();
    let last = *increments.last().unwrap();
    let class = if last > MILD_GROWTH_THRESHOLD { MildClass::NonMild } else { MildClass::Mild };
    Ok(MildSweep { dims: levels.iter().map(|(s, _)| s.dim()).collect(), defects, increments, class })
}
