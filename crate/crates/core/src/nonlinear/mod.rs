//! Decaying solutions of `(d/dt)(Ax) = -x + G(x)`.

pub mod maps;
pub mod picard;

pub use maps::{
    cutoff, cutoff_constants, sampled_lipschitz, BilinearMap, CutoffBilinear, CutoffConstants, LinearMap, NonlinearMap,
    ZeroMap,
};
pub use picard::{
    center_solve, h1_tail_sq, picard_solve, residual, stable_homogeneous, PicardConfig, PicardReport, PicardSolution,
    GAMMA_CAP,
};
