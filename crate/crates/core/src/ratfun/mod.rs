//! Real rational (matrix) functions and the convex invertible cone they
//! generate from `1/s` and `1`.

pub mod cic;
pub mod network;
pub mod poly;
pub mod pr;
pub mod rational;

pub use cic::{cic_eval, cic_sample, CicExpression, CicNode};
pub use network::{
    feedback_network, ladder_impedance, maximality_counterexample, phi, CircuitSpec,
    InvertibleAlgebra, MaximalityCounterexample,
};
pub use poly::Polynomial;
pub use pr::{pr_check, PrFailure, PrFailureReason, PrGrid, PrVerdict};
pub use rational::{Rational, RationalMatrixFunction};
