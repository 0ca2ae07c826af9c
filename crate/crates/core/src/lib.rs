//! Numerical laboratory for the quantum (Moyal) plane.
//!
//! The crate realizes the operator algebra of the quantum Euclidean space
//! `L_∞(ℝ^d_θ)` at desk scale: Weyl symbols under twisted convolution, the
//! matrix basis of the Schwartz space, dense Nystrom discretizations of
//! convolution-product operators and quantized derivatives, singular-value
//! asymptotics, and operator zeta functions with residue extraction.
//!
//! Module map:
//! - [`numerics`]: quadrature grids, sphere grids, Pauli matrices, special functions
//! - [`algebra`]: twisted convolution, matrix basis, trace/L_p norms, Sobolev semi-norms
//! - [`assembly`]: dense kernel operators on `ℂ^{N_d} ⊗ L₂(ℝ^d)`
//! - [`spectral`]: singular values, weak quasi-norms, tail fits, limit lemmas
//! - [`zeta`]: `Tr(A^z B^z)`, closed-form integral identities, residues, Tauberian checks

pub mod algebra;
pub mod assembly;
pub mod numerics;
pub mod spectral;
pub mod zeta;

mod linalg;

pub use linalg::set_threads;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grids are incompatible: {0}")]
    GridMismatch(String),
    #[error("numerical decomposition failed: {0}")]
    Decomposition(String),
    #[error("operator is not positive: {0}")]
    NotPositive(String),
    #[error("contract violated: {0}")]
    ContractViolation(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
