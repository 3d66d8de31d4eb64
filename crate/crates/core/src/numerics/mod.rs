//! Deterministic one-dimensional quadrature and tail classification.

mod quadrature;
mod tail;

pub use quadrature::{
    integrate, integrate_with_breaks, invert_nondecreasing, Quadrature, QuadratureConfig, QuadratureError,
};
pub use tail::{
    integrate_improper, Convergence, ConvergenceResult, Envelope, TailError, TailKind, TailModel, BOUNDED_TAIL_HORIZON,
};
