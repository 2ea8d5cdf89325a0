//! The linear problem `(d/dt)(Ax) + x = f`.

pub mod bvp;
pub mod fourier;
pub mod mild;
pub mod resolvent;
pub mod voc;

pub use bvp::{
    bvp_report, fourier_crosscheck, homogeneous_part, random_instance, solve_bvp, solve_bvp_at, weak_residual,
    BoundaryData, BoundaryForm, BvpReport,
};
pub use fourier::{alias_transfer, solve_fourier, FourierSolution};
pub use mild::{mild_defect, mild_sweep, MildClass, MildSweep};
pub use resolvent::{resolvent_a_norm, resolvent_apply, resolvent_factor, resolvent_norm};
pub use voc::{solve_particular, solve_voc, solve_voc_at, CutoffParam, VocPlan};
