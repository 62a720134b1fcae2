//! Rank-r Newton iteration for nonisolated zeros of smooth nonlinear systems.
//!
//! The iteration
//!
//! ```text
//! x_{k+1} = x_k - J_rank-r(x_k)^+ f(x_k)
//! ```
//!
//! replaces the Jacobian by its best rank-`r` approximation before taking the
//! Moore–Penrose inverse. With `r` equal to the Jacobian rank on a solution
//! manifold the iteration converges quadratically to a point of that
//! manifold, and with inexact data it converges to a stationary point that
//! approximates the underlying solution.
//!
//! The crate is `no_std` (it needs `alloc`) and is organized as:
//!
//! * [`linalg`]: dense complex kernels (Jacobi SVD, Householder QR, Givens
//!   updates) and the rank-r minimum-norm least-squares solvers.
//! * [`newton`]: the iteration driver, Gauss-Newton, variable layouts and
//!   convergence diagnostics.
//! * [`deflation`]: depth deflation of ultrasingular zeros.
//! * [`polysys`]: sparse multivariate polynomials with exact derivatives.
//! * [`catalog`]: ready-to-run example systems.
#![no_std]
#![allow(clippy::many_single_char_names)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod deflation;
mod error;
pub mod linalg;
pub mod newton;
pub mod polysys;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector, C64};
pub use newton::{
    gauss_newton, newton_rank_r, ConvergenceStatus, IterationTrace, NewtonOptions,
    NonlinearSystem, RankChoice, SolverChoice, Termination,
};
