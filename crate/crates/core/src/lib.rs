//! Solution operators, boundary-value solvers and estimate checks for
//! `(d/dt)(Ax) = -x + G(x)` with `A` diagonal, indefinite and possibly degenerate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boltzmann;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimates;
pub mod fit;
pub mod linear;
pub mod nonlinear;
pub mod quad;
pub mod semigroup;
pub mod spectral;
pub mod trajectory;
