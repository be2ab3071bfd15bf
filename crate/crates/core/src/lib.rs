//! Spectral shift functions of finite-dimensional self-adjoint pairs.
//!
//! For Hermitian `H0` and `V` the shift function `ξ(λ) = N_{H0}(λ) - N_{H0+V}(λ)`
//! is a difference of eigenvalue counting functions. The crate computes it
//! exactly, checks the trace formula and its relatives, and scans
//! coupling-constant families `H0 + V(s)` for the monotonicity, concavity and
//! contour-positivity properties those identities imply.

pub mod analytic;
pub mod contour;
pub mod error;
pub mod flow;
pub mod function;
pub mod generate;
pub mod herglotz;
pub mod linalg;
pub mod quad;
pub mod rng;
pub mod shift;
pub mod step;

pub use error::{Error, Result};
pub use flow::{OperatorFamily, ScanReport};
pub use function::SmoothFunction;
pub use linalg::{ComplexMatrix, HermitianOperator, RealInterval};
pub use step::StepFunction;
