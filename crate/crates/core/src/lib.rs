//! Recovery of piecewise-constant signals and images from incomplete linear
//! measurements by minimizing the ratio `‖Du‖₁ / ‖Du‖₂` of the discrete
//! gradient, subject to `Au = b` and a box constraint `u ∈ [p, q]^N`.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: images, synthetic signals and phantoms, error metrics.
//! - [`operators`]: periodic gradient, masked Fourier sampling, parallel-beam
//!   Radon projection, all with matched adjoints.
//! - [`prox`]: closed-form subproblem kernels (shrinkage, half thresholding,
//!   the `L1 − αL2` prox, the `h` update of the ratio model).
//! - [`solvers`]: the double-loop ADMM for the ratio model, the TV / `Lp` /
//!   `L1 − αL2` comparison solvers sharing its inner loop, and the
//!   zero-filling and SART baselines.
//!
//! Images are stored column-major: pixel `(row, col)` of an `m × n` image
//! lives at linear index `row + col * m`.

pub mod error;
pub mod grid;
pub mod io;
pub mod operators;
pub mod prox;
pub mod solvers;

pub use error::{Error, Result};
pub use grid::Image;
