//! The quantum Euclidean space algebra: Weyl symbols under twisted convolution,
//! the matrix realization of the Schwartz space, the trace τ_θ, L_p norms,
//! partial derivatives and both Sobolev semi-norms.

mod basis;
mod element;
mod poly;
mod seminorm;
mod symbol;
mod theta;

pub use basis::{
    build_basis, build_basis_checked, ground_state, BasisCheck, BasisTable, STAR_STABLE_ORDER,
};
pub use element::{schatten, MatrixElement, MatrixElementFile};
pub use poly::{PolyGauss, Term};
pub use seminorm::{sandwich_lower, sandwich_upper, sobolev_seminorm, triple_seminorm};
pub use symbol::{twisted_convolution, SymbolEval, SymbolFn, WeylSymbol};
pub use theta::ThetaMatrix;
