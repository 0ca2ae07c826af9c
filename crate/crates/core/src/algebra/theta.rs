//! The deformation matrix θ in canonical block form θ = θ₀·J.

use crate::{Error, Result};
use ndarray::Array2;

/// Real antisymmetric nondegenerate d×d matrix in block form θ = θ₀·J,
/// J the standard symplectic matrix. det θ = θ₀^d.
#[derive(Debug, Clone)]
pub struct ThetaMatrix {
    pub dim: usize,
    pub theta0: f64,
    mat: Array2<f64>,
}

impl ThetaMatrix {
    pub fn new(dim: usize, theta0: f64) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "theta needs even positive dimension, got {dim}"
            )));
        }
        if !(theta0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "theta0 must be positive (nondegenerate block form), got {theta0}"
            )));
        }
        let mut mat = Array2::zeros((dim, dim));
        for b in 0..dim / 2 {
            mat[(2 * b, 2 * b + 1)] = theta0;
            mat[(2 * b + 1, 2 * b)] = -theta0;
        }
        Ok(ThetaMatrix { dim, theta0, mat })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.mat
    }

    pub fn det(&self) -> f64 {
        self.theta0.powi(self.dim as i32)
    }

    /// ⟨t, θ s⟩
    #[inline]
    pub fn pairing(&self, t: &[f64], s: &[f64]) -> f64 {
        let mut acc = 0.0;
        for b in 0..self.dim / 2 {
            acc += self.theta0 * (t[2 * b] * s[2 * b + 1] - t[2 * b + 1] * s[2 * b]);
        }
        acc
    }

    /// (2π)^d det θ — the square of the trace normalization.
    pub fn trace_norm_sq(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim as i32) * self.det()
    }

    /// ((2π)^d det θ)^{1/2}, the factor in τ_θ = ((2π)^d det θ)^{1/2} Tr ∘ r_θ.
    pub fn trace_scale(&self) -> f64 {
        self.trace_norm_sq().sqrt()
    }

    /// Common squared L₂ norm of the matrix-basis symbols: s² = (det θ)^{1/2} / (2π)^{d/2}.
    pub fn basis_norm_sq(&self) -> f64 {
        self.det().sqrt() / (2.0 * std::f64::consts::PI).powf(self.dim as f64 / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_form_is_antisymmetric() {
        let th = ThetaMatrix::new(4, 2.0).unwrap();
        let m = th.matrix();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], -m[(j, i)]);
            }
        }
        assert_eq!(th.det(), 16.0);
    }

    #[test]
    fn pairing_matches_matrix() {
        let th = ThetaMatrix::new(2, 2.0).unwrap();
        let t = [1.5, -0.5];
        let s = [0.25, 2.0];
        // ⟨t, θs⟩ = θ₀ (t₁ s₂ − t₂ s₁)
        assert!((th.pairing(&t, &s) - 2.0 * (1.5 * 2.0 + 0.5 * 0.25)).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(ThetaMatrix::new(3, 1.0).is_err());
        assert!(ThetaMatrix::new(2, 0.0).is_err());
    }
}
