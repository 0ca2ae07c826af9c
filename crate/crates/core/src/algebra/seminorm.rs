//! The homogeneous Sobolev semi-norm Σ_j ‖∂_j x‖_{L_d} and the sphere-averaged,
//! spin-tensored semi-norm ||| x ||| it is equivalent to, with the explicit
//! sandwich constants c_d, C_d.

use super::basis::BasisTable;
use super::element::{schatten, MatrixElement};
use crate::numerics::{sphere_area, SphereGrid, SpinStructure};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// ‖x‖_{Ẇ¹_d} = Σ_j ‖∂_j x‖_{L_d}.
pub fn sobolev_seminorm(x: &MatrixElement, table: &BasisTable) -> Result<f64> {
    let d = x.theta.dim as f64;
    let mut acc = 0.0;
    for j in 0..x.theta.dim {
        acc += x.partial_derivative(j, table)?.lp_norm(d)?;
    }
    Ok(acc)
}

/// |||x||| = ‖ Σ_j γ_j ⊗ (∂_j x ⊗ 1 − Σ_k ∂_k x ⊗ s_k s_j) ‖_{L_d} over
/// M_{N_d} ⊗ L_∞(ℝ^d_θ) ⊗ L_∞(S^{d-1}).
///
/// Per sphere node s the block matrix Σ_j γ_j ⊗ A_j(s) with
/// A_j(s) = ∂_j x − s_j Σ_k s_k ∂_k x is assembled on coefficients; its
/// Schatten-d norm^d is accumulated with the sphere weights and the trace
/// scale ((2π)^d det θ)^{1/2}, and the d-th root is returned.
pub fn triple_seminorm(
    x: &MatrixElement,
    table: &BasisTable,
    sphere: &SphereGrid,
    spin: &SpinStructure,
) -> Result<f64> {
    let d = x.theta.dim;
    if sphere.dim != d || spin.dim != d {
        return Err(Error::DimensionMismatch(
            "sphere/spin dimension differs from the element's".into(),
        ));
    }
    let m = x.truncation();
    let nd = spin.spin_dim;
    let derivs: Vec<Array2<Complex64>> = (0..d)
        .map(|j| x.partial_derivative(j, table).map(|e| e.coeffs))
        .collect::<Result<_>>()?;

    let scale = x.theta.trace_scale();
    let df = d as f64;
    let mut acc = 0.0;
    for node in 0..sphere.len() {
        let s = sphere.point(node);
        // Σ_k s_k ∂_k x
        let mut radial: Array2<Complex64> = Array2::zeros((m, m));
        for k in 0..d {
            radial.zip_mut_with(&derivs[k], |r, &v| *r += Complex64::new(s[k], 0.0) * v);
        }
        // block matrix Σ_j γ_j ⊗ (∂_j x − s_j · radial)
        let mut block: Array2<Complex64> = Array2::zeros((nd * m, nd * m));
        for j in 0..d {
            let mut a_j = derivs[j].clone();
            a_j.zip_mut_with(&radial, |v, &r| *v -= Complex64::new(s[j], 0.0) * r);
            let gamma = &spin.gammas[j];
            for bi in 0..nd {
                for bj in 0..nd {
                    let g = gamma[(bi, bj)];
                    if g.norm() == 0.0 {
                        continue;
                    }
                    for p in 0..m {
                        for q in 0..m {
                            block[(bi * m + p, bj * m + q)] += g * a_j[(p, q)];
                        }
                    }
                }
            }
        }
        let sd = schatten(&block, df)?;
        acc += sphere.weight(node) * scale * sd.powf(df);
    }
    Ok(acc.powf(1.0 / df))
}

/// Lower sandwich constant c_d = √2 (d−1)/d² ω_d^{1/d}.
pub fn sandwich_lower(d: usize) -> f64 {
    let df = d as f64;
    2f64.sqrt() * (df - 1.0) / (df * df) * sphere_area(d).powf(1.0 / df)
}

/// Upper sandwich constant C_d = √2 ω_d^{1/d} (1 + d).
pub fn sandwich_upper(d: usize) -> f64 {
    let df = d as f64;
    2f64.sqrt() * sphere_area(d).powf(1.0 / df) * (1.0 + df)
}
