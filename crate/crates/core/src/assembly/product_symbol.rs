//! The symbol map on finite sums Σ_j x_j ⊗ g_j: a coefficient-matrix-valued
//! function on the sphere grid, and its L_d norm over
//! L_∞(ℝ^d_θ) ⊗ L_∞(S^{d-1}) (the main2 asymptotic coefficient).

use crate::algebra::{schatten, MatrixElement};
use crate::numerics::SphereGrid;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::sync::Arc;

/// Angular factor g ∈ C(S^{d-1}).
#[derive(Clone)]
pub struct AngularFn {
    pub f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub label: String,
}

impl AngularFn {
    pub fn new(f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>, label: impl Into<String>) -> Self {
        AngularFn {
            f,
            label: label.into(),
        }
    }

    pub fn one() -> Self {
        AngularFn::new(Arc::new(|_| 1.0), "1")
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        (self.f)(s)
    }
}

impl std::fmt::Debug for AngularFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AngularFn({})", self.label)
    }
}

/// sym(Σ_j π₁(x_j) π₂(g_j)) = Σ_j x_j ⊗ g_j sampled on a sphere grid.
#[derive(Debug)]
pub struct ProductSymbol {
    pub sphere: SphereGrid,
    /// coefficient matrix Σ_j g_j(s) a_j at each sphere node
    pub node_matrices: Vec<Array2<Complex64>>,
    pub trace_scale: f64,
    pub dim: usize,
}

impl ProductSymbol {
    /// ‖Σ_j x_j ⊗ g_j‖_{L_d}: per-node Schatten-d norms accumulated with the
    /// sphere weights and the trace scale, d-th root at the end.
    pub fn norm_ld(&self) -> Result<f64> {
        let d = self.dim as f64;
        let mut acc = 0.0;
        for (node, m) in self.node_matrices.iter().enumerate() {
            let sd = schatten(m, d)?;
            acc += self.sphere.weight(node) * self.trace_scale * sd.powf(d);
        }
        Ok(acc.powf(1.0 / d))
    }
}

/// Build the tensor-product representation of Σ_j x_j ⊗ g_j.
pub fn symbol_of_product_list(
    terms: &[(MatrixElement, AngularFn)],
    sphere: &SphereGrid,
) -> Result<ProductSymbol> {
    if terms.is_empty() {
        // empty sum: zero symbol on a minimal structure
        return Ok(ProductSymbol {
            sphere: sphere.clone(),
            node_matrices: vec![Array2::zeros((1, 1)); sphere.len()],
            trace_scale: 1.0,
            dim: sphere.dim,
        });
    }
    let theta = &terms[0].0.theta;
    if theta.dim != sphere.dim {
        return Err(Error::DimensionMismatch(
            "sphere dimension differs from the elements'".into(),
        ));
    }
    let m = terms[0].0.truncation();
    for (x, _) in terms {
        if x.truncation() != m {
            return Err(Error::DimensionMismatch(
                "all elements in a product list must share the truncation".into(),
            ));
        }
    }
    let mut node_matrices = Vec::with_capacity(sphere.len());
    for node in 0..sphere.len() {
        let s = sphere.point(node);
        let mut acc: Array2<Complex64> = Array2::zeros((m, m));
        for (x, g) in terms {
            let gv = g.eval(s);
            if gv != 0.0 {
                acc.zip_mut_with(&x.coeffs, |a, &c| *a += Complex64::new(gv, 0.0) * c);
            }
        }
        node_matrices.push(acc);
    }
    Ok(ProductSymbol {
        sphere: sphere.clone(),
        node_matrices,
        trace_scale: theta.trace_scale(),
        dim: sphere.dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ThetaMatrix;
    use crate::numerics::{seeded_rng, sphere_area};

    #[test]
    fn empty_list_is_zero() {
        let sphere = SphereGrid::circle(32).unwrap();
        let p = symbol_of_product_list(&[], &sphere).unwrap();
        assert_eq!(p.norm_ld().unwrap(), 0.0);
    }

    #[test]
    fn constant_angular_factor() {
        // single term (x, g ≡ 1): ‖x ⊗ 1‖_d = ‖x‖_d · ω_d^{1/d}
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let sphere = SphereGrid::circle(64).unwrap();
        let mut rng = seeded_rng(3);
        let x = MatrixElement::random_schwartz(5, &theta, &mut rng, 0.3);
        let p = symbol_of_product_list(&[(x.clone(), AngularFn::one())], &sphere).unwrap();
        let want = x.lp_norm(2.0).unwrap() * sphere_area(2).powf(0.5);
        let got = p.norm_ld().unwrap();
        assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn disjoint_supports_add_in_dth_power() {
        // two terms with disjointly supported g's: (Σ ‖x_j‖_d^d ‖g_j‖_d^d)^{1/d}
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let sphere = SphereGrid::circle(256).unwrap();
        let mut rng = seeded_rng(4);
        let x1 = MatrixElement::random_schwartz(4, &theta, &mut rng, 0.3);
        let x2 = MatrixElement::random_schwartz(4, &theta, &mut rng, 0.3);
        let g1 = AngularFn::new(Arc::new(|s: &[f64]| if s[0] > 0.1 { 1.5 } else { 0.0 }), "right");
        let g2 = AngularFn::new(Arc::new(|s: &[f64]| if s[0] < -0.1 { 0.7 } else { 0.0 }), "left");
        let p = symbol_of_product_list(
            &[(x1.clone(), g1.clone()), (x2.clone(), g2.clone())],
            &sphere,
        )
        .unwrap();
        let gnorm = |g: &AngularFn| {
            sphere
                .integrate(|s| g.eval(s).powi(2))
                .powf(0.5)
        };
        let want = (x1.lp_norm(2.0).unwrap().powi(2) * gnorm(&g1).powi(2)
            + x2.lp_norm(2.0).unwrap().powi(2) * gnorm(&g2).powi(2))
        .sqrt();
        let got = p.norm_ld().unwrap();
        assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
    }
}
