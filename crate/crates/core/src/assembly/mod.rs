//! Dense Nystrom discretizations of the operators on L₂(ℝ^d) and ℂ^{N_d}⊗L₂(ℝ^d):
//! multipliers g(t/|t|)w(|t|), convolution-product kernels π₁(U_θ(f))·h(∇_θ),
//! quantized derivatives [sgn(𝒟), 1⊗x] and the first-order approximant 𝒜(1+𝒟²)^{-1/2}.
//!
//! Matrix entries carry √w_i K(t_i,t_j) √w_j so that matrix singular values
//! approximate operator singular values. Multipliers stay diagonal.

mod export;
mod kernel;
mod product_symbol;

pub use export::OperatorSidecar;
pub use kernel::{
    assemble_approximant, assemble_conv_product, assemble_multiplier,
    assemble_quantized_derivative, FullSymbol, KernelOperator, OperatorData,
};
pub use product_symbol::{symbol_of_product_list, AngularFn, ProductSymbol};
