//! Dense complex matrices, Hermitian operators and their functional calculus.

mod functional;
mod hermitian;
mod interval;
mod matrix;

pub use functional::{
    apply_function, projected_trace, resolvent, riesz_apply, schatten_norm, spectral_projection, trace,
    trace_function, trace_weighted_function, SchattenP,
};
pub use hermitian::{eig_hermitian, HermitianOperator, SpectralDecomposition};
pub use interval::RealInterval;
pub use matrix::ComplexMatrix;
