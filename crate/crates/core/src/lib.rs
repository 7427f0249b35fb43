//! Numerical toolkit for passive linear systems viewed through matrix-convex
//! invertible cones.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`] and [`matcore`]: the dense complex kernel (Hermitian split,
//!   definiteness, sign matrix, exponential, isometries).
//! * [`cones`]: Lyapunov cones `L_H`, maximality witnesses, matrix-convex and
//!   structured (n,m) combinations.
//! * [`ratfun`]: real rational (matrix) functions, convex invertible cone
//!   expressions, positive-real checks, circuit builders.
//! * [`realize`]: realization arrays `[A B; C D]`, KYP certificates, balancing.
//! * [`incsim`]: switched-system simulation and exponential envelopes.
//! * [`cli`]: the `cic` command-line surface.

pub mod cli;
pub mod cones;
pub mod error;
pub mod incsim;
pub mod json;
pub mod matcore;
pub mod matrix;
pub mod ratfun;
pub mod realize;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;

/// Global relative tolerance used by every classification in the crate.
pub const DEFAULT_TOL: f64 = 1e-9;
