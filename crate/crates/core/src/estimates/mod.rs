//! Runtime checks of the decay, smoothing and embedding estimates on
//! computed trajectories.

pub mod bochner;
pub mod decay;
pub mod dissipation;
pub mod sobolev;

use serde::Serialize;

pub use bochner::{bochner_counterexample, bochner_g, bochner_inner, bochner_norm_sq, BochnerReport};
pub use decay::{
    decay_fit, derivative_samples, sharpness_probe, DecayReport, DecayWindow, SharpnessReport, SharpnessRow,
};
pub use dissipation::{
    l2_tail_series, quadratic_form_series, techcor_check, techlem_check, PairCheck, QuadformReport, TailReport,
    TechcorReport, TechlemReport,
};
pub use sobolev::{diffquot_ops, haar_c2, haar_l4_bound, haar_tau_grid, DiffQuot, HaarReport, HAAR_CONSTANT};

/// One inequality `lhs <= rhs`. Non-finite sides never hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self::with_tol(lhs, rhs, 0.0)
    }

    /// `lhs <= rhs + tol`.
    pub fn with_tol(lhs: f64, rhs: f64, tol: f64) -> Self {
        let finite = lhs.is_finite() && rhs.is_finite() && tol.is_finite();
        Inequality { lhs, rhs, margin: rhs - lhs, holds: finite && lhs <= rhs + tol }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_never_holds() {
        assert!(!Inequality::new(f64::NAN, 1.0).holds);
        assert!(!Inequality::new(0.0, f64::INFINITY).holds);
        assert!(!Inequality::new(f64::NEG_INFINITY, 0.0).holds);
        assert!(Inequality::new(0.0, 0.0).holds);
        assert!(Inequality::with_tol(1.0 + 1e-12, 1.0, 1e-10).holds);
    }
}
