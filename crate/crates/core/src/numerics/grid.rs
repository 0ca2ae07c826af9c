//! Momentum-space quadrature grids (Nystrom host) and sphere grids.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tensor quadrature rule on the momentum box [-L, L]^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridScheme {
    /// Uniform cells with nodes shifted by half a cell; the origin is never a node.
    MidpointOffset,
    /// Gauss-Legendre nodes/weights per axis; `n` must be even to keep 0 off-grid.
    GaussLegendre,
}

impl GridScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "midpoint-offset-uniform" | "midpoint-offset" | "midpoint" => {
                Ok(GridScheme::MidpointOffset)
            }
            "gauss-legendre-per-axis" | "gauss-legendre" => Ok(GridScheme::GaussLegendre),
            other => Err(Error::InvalidArgument(format!(
                "unknown grid scheme '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GridScheme::MidpointOffset => "midpoint-offset-uniform",
            GridScheme::GaussLegendre => "gauss-legendre-per-axis",
        }
    }
}

/// Weighted point set in ℝ^d on which integral kernels are discretized.
///
/// Points are stored flattened (`coords[i*d..(i+1)*d]`); weights are the tensor
/// quadrature weights. `gaussian_sanity_error` records the relative defect of
/// Σ w e^{-|t|²} against π^{d/2} at construction time; the grid tolerance used
/// by algebra checks derives from it.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub dim: usize,
    pub points_per_axis: usize,
    pub box_halfwidth: f64,
    pub scheme: GridScheme,
    coords: Vec<f64>,
    weights: Vec<f64>,
    pub gaussian_sanity_error: f64,
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on Legendre polynomials from the Chebyshev initial guess.
pub(crate) fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Build a tensor quadrature grid on [-L, L]^d.
pub fn make_grid(dim: usize, halfwidth: f64, n: usize, scheme: GridScheme) -> Result<MomentumGrid> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "grid dimension must be even and positive, got {dim}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "points_per_axis must be >= 2, got {n}"
        )));
    }
    if !(halfwidth > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "box halfwidth must be positive, got {halfwidth}"
        )));
    }
    if n % 2 != 0 {
        // odd rules of either scheme place an axis node at 0, so the origin
        // would be a grid point; σ(t) and g(t/|t|) are undefined there
        return Err(Error::InvalidArgument(format!(
            "points_per_axis must be even to keep the origin off-grid, got {n}"
        )));
    }
    let (axis_nodes, axis_weights): (Vec<f64>, Vec<f64>) = match scheme {
        GridScheme::MidpointOffset => {
            let h = 2.0 * halfwidth / n as f64;
            let nodes = (0..n)
                .map(|i| -halfwidth + (i as f64 + 0.5) * h)
                .collect();
            (nodes, vec![h; n])
        }
        GridScheme::GaussLegendre => {
            let (x, w) = gauss_legendre_rule(n);
            (
                x.iter().map(|&t| t * halfwidth).collect(),
                w.iter().map(|&t| t * halfwidth).collect(),
            )
        }
    };

    let npoints = n.pow(dim as u32);
    let mut coords = Vec::with_capacity(npoints * dim);
    let mut weights = Vec::with_capacity(npoints);
    let mut idx = vec![0usize; dim];
    for _ in 0..npoints {
        let mut w = 1.0;
        for a in 0..dim {
            coords.push(axis_nodes[idx[a]]);
            w *= axis_weights[idx[a]];
        }
        weights.push(w);
        // odometer increment, last axis fastest
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
        }
    }

    let mut grid = MomentumGrid {
        dim,
        points_per_axis: n,
        box_halfwidth: halfwidth,
        scheme,
        coords,
        weights,
        gaussian_sanity_error: 0.0,
    };
    let target = PI.powf(dim as f64 / 2.0);
    let sum: f64 = (0..grid.len())
        .map(|i| {
            let t = grid.point(i);
            grid.weight(i) * (-t.iter().map(|x| x * x).sum::<f64>()).exp()
        })
        .sum();
    grid.gaussian_sanity_error = ((sum - target) / target).abs();
    Ok(grid)
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tolerance for grid-quadrature identities: max(1e-6, 10x the Gaussian sanity error).
    pub fn tolerance(&self) -> f64 {
        (10.0 * self.gaussian_sanity_error).max(1e-6)
    }

    /// Quadrature sum Σ w_i f(t_i).
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(self.point(i))).sum()
    }

    /// True when both grids host the same point set.
    pub fn same_geometry(&self, other: &MomentumGrid) -> bool {
        self.dim == other.dim
            && self.points_per_axis == other.points_per_axis
            && self.scheme == other.scheme
            && (self.box_halfwidth - other.box_halfwidth).abs() < 1e-12
    }
}

/// Quadrature nodes and weights on the unit sphere S^{d-1}; weights sum to ω_d.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    /// Uniform angular grid on the circle S^1 (trapezoid = uniform weights 2π/n).
    pub fn circle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 circle nodes, got {n}"
            )));
        }
        let mut points = Vec::with_capacity(2 * n);
        let w = 2.0 * PI / n as f64;
        for k in 0..n {
            let phi = w * (k as f64 + 0.5);
            points.push(phi.cos());
            points.push(phi.sin());
        }
        Ok(SphereGrid {
            dim: 2,
            points,
            weights: vec![w; n],
        })
    }

    /// Product rule on S^3 in hyperspherical angles; `n` controls each angular factor.
    ///
    /// Coordinates (cos ψ, sin ψ cos ϑ, sin ψ sin ϑ cos φ, sin ψ sin ϑ sin φ) with
    /// surface measure sin²ψ sin ϑ dψ dϑ dφ; ψ and ϑ use Gauss-Legendre, φ uniform.
    pub fn three_sphere(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!(
                "need at least 4 nodes per angle, got {n}"
            )));
        }
        let (gl_nodes, gl_weights) = gauss_legendre_rule(n);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let wphi = 2.0 * PI / n as f64;
        for i in 0..n {
            // ψ ∈ [0, π]
            let psi = (gl_nodes[i] + 1.0) * PI / 2.0;
            let wpsi = gl_weights[i] * PI / 2.0 * psi.sin().powi(2);
            for j in 0..n {
                let theta = (gl_nodes[j] + 1.0) * PI / 2.0;
                let wtheta = gl_weights[j] * PI / 2.0 * theta.sin();
                for k in 0..n {
                    let phi = wphi * (k as f64 + 0.5);
                    points.push(psi.cos());
                    points.push(psi.sin() * theta.cos());
                    points.push(psi.sin() * theta.sin() * phi.cos());
                    points.push(psi.sin() * theta.sin() * phi.sin());
                    weights.push(wpsi * wtheta * wphi);
                }
            }
        }
        Ok(SphereGrid {
            dim: 4,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(self.point(i))).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sphere_area;

    #[test]
    fn unit_box_two_points() {
        let g = make_grid(2, 1.0, 2, GridScheme::MidpointOffset).unwrap();
        assert_eq!(g.len(), 4);
        for i in 0..4 {
            let p = g.point(i);
            assert!((p[0].abs() - 0.5).abs() < 1e-15);
            assert!((p[1].abs() - 0.5).abs() < 1e-15);
            assert!((g.weight(i) - 1.0).abs() < 1e-15); // cell area (2L/n)^d = 1
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_grid(2, 1.0, 0, GridScheme::MidpointOffset).is_err());
        assert!(make_grid(2, 1.0, 1, GridScheme::MidpointOffset).is_err());
        assert!(make_grid(2, 0.0, 8, GridScheme::MidpointOffset).is_err());
        assert!(make_grid(2, -3.0, 8, GridScheme::MidpointOffset).is_err());
        assert!(make_grid(3, 1.0, 8, GridScheme::MidpointOffset).is_err());
        assert!(make_grid(2, 1.0, 9, GridScheme::GaussLegendre).is_err()); // odd GL puts 0 on grid
    }

    #[test]
    fn origin_never_a_node() {
        for &(l, n) in &[(1.0, 2usize), (8.0, 64), (5.0, 30)] {
            let g = make_grid(2, l, n, GridScheme::MidpointOffset).unwrap();
            for i in 0..g.len() {
                let p = g.point(i);
                assert!(p[0] * p[0] + p[1] * p[1] > 1e-12);
            }
        }
        let g = make_grid(2, 4.0, 16, GridScheme::GaussLegendre).unwrap();
        for i in 0..g.len() {
            let p = g.point(i);
            assert!(p[0] * p[0] + p[1] * p[1] > 1e-12);
        }
        // odd rules would put the origin on the grid
        assert!(make_grid(2, 5.0, 31, GridScheme::MidpointOffset).is_err());
        assert!(make_grid(2, 5.0, 9, GridScheme::GaussLegendre).is_err());
    }

    #[test]
    fn gaussian_quadrature_sanity() {
        // (L=8, n=64): Σ w e^{-|t|²} within 1e-8 of π
        let g = make_grid(2, 8.0, 64, GridScheme::MidpointOffset).unwrap();
        let sum = g.integrate(|t| (-(t[0] * t[0] + t[1] * t[1])).exp());
        assert!((sum - PI).abs() < 1e-8, "defect {:.2e}", (sum - PI).abs());
    }

    #[test]
    fn gaussian_error_decreases_under_refinement() {
        // three resolutions at fixed L, coarse enough that the error has not
        // yet saturated at float noise
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                make_grid(2, 6.0, n, GridScheme::MidpointOffset)
                    .unwrap()
                    .gaussian_sanity_error
            })
            .collect();
        assert!(errs[1] < errs[0], "{errs:?}");
        assert!(errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn gauss_legendre_exactness() {
        // n-point GL is exact for polynomials of degree 2n-1
        let (x, w) = gauss_legendre_rule(8);
        let int_x14: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert!((int_x14 - 2.0 / 15.0).abs() < 1e-13);
        let gl = make_grid(2, 8.0, 48, GridScheme::GaussLegendre).unwrap();
        assert!(
            gl.gaussian_sanity_error < 1e-12,
            "{:.3e}",
            gl.gaussian_sanity_error
        );
    }

    #[test]
    fn circle_weights_sum_to_circumference() {
        let s = SphereGrid::circle(64).unwrap();
        assert!((s.total_weight() - 2.0 * PI).abs() < 1e-12);
        for i in 0..s.len() {
            let p = s.point(i);
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn three_sphere_weights_sum_to_omega4() {
        let s = SphereGrid::three_sphere(16).unwrap();
        let rel = (s.total_weight() - sphere_area(4)).abs() / sphere_area(4);
        assert!(rel < 1e-12, "rel={rel:.3e}");
        // second moment of a coordinate: ∫ s_1² = ω_4 / 4
        let m2 = s.integrate(|p| p[0] * p[0]);
        assert!((m2 - sphere_area(4) / 4.0).abs() < 1e-10);
    }
}
