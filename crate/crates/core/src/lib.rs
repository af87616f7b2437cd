//! Stability analysis for one-dimensional variational problems
//! `∫ (θ' − A)²/2 − V(θ) ds` with Dirichlet or Neumann ends,
//! together with a conjugate-point oracle and the planar elastic rod application.

// `!(x > 0.0)` is used on purpose so that NaN is rejected with the other bad inputs
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arclen;
pub mod classify;
pub mod conjugate;
pub mod elliptic;
pub mod error;
pub mod ode;
pub mod par;
pub mod phase;
pub mod potential;
pub mod quad;
pub mod rod;
pub mod roots;
pub mod spline;
pub mod tridiag;

pub use error::{Error, Result};
