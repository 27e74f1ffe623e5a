//! One-dimensional charge-conserving (CCPB) and classical (PB)
//! Poisson–Boltzmann boundary-value solvers with Robin boundary data, the
//! algebraic zero-`eps` limits of their solutions, and boundary-layer
//! diagnostics.
//!
//! The scaled CCPB problem on `(-1, 1)` is
//!
//! ```text
//! eps^2 phi'' = sum_k a_k alpha_k e^{a_k phi} / int e^{a_k phi}
//!             - sum_l b_l beta_l e^{-b_l phi} / int e^{-b_l phi}
//! phi(1) + eta phi'(1) = phi_plus,   phi(-1) - eta phi'(-1) = phi_minus
//! ```
//!
//! and PB replaces the right-hand side by `f'(phi) / 2`.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod energy;
pub mod error;
pub mod exec;
pub mod fem;
pub mod grid;
pub mod ions;
pub mod limits;
pub mod presets;
pub mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{make_graded, make_uniform, trapz_weighted_exp, Field, Grid, GridKind};
pub use ions::{BoundaryData, IonSystem, Species};
pub use solver::{solve, Model, SolveReport, SolverConfig};
pub use limits::{gamma_sweep, solve_tc, LimitPair, SweepTable};
pub use asymptotics::{CheckResult, DiagnosticsReport, Side};
