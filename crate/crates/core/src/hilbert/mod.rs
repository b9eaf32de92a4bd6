//! Finite-dimensional Hilbert-space primitives: dense vectors, the product
//! space `H x G`, linear operators with adjoints, operator-norm estimation,
//! and the `P`-form that measures distances in the Lyapunov analysis.

mod operator;
mod pform;
mod power;
mod vector;

pub use operator::{apply, DenseMatrix, LinearOperator, OperatorKind, DEFAULT_NORM_SAFETY};
pub use pform::{p_form_sandwich, p_inner, p_quadratic_form};
pub use power::{estimate_norm, NormEstimate, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub use vector::{dot, PPoint, Vector};
