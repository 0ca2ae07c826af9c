//! The matrix basis f_{k,l} of the Schwartz space on the Moyal plane (d = 2).
//!
//! Construction: (a) root-find the Gaussian ground state α e^{-β|t|²} so that
//! f ⋆_θ f = f, using the numerical twisted convolution as the oracle; then
//! (b) ladder construction with the creation/annihilation generators
//! A = (X₁ - iX₂)/√(2θ₀), which act on polynomial×Gaussian symbols as exact
//! first-order operators. The resulting family behaves as matrix units under
//! ⋆_θ and is orthogonal with common norm² s² = (det θ)^{1/2}/(2π)^{d/2};
//! the table's contract is exactly those two invariants plus f_{k,l}* = f_{l,k}.

use super::poly::{PolyGauss, Term};
use super::theta::ThetaMatrix;
use crate::numerics::{gauss_legendre_rule, MomentumGrid};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::sync::Arc;

/// Twisted self-convolution of the unit-amplitude Gaussian e^{-β|t|²},
/// evaluated at one point by dense Gauss-Legendre quadrature. Kept free of
/// the closed forms used elsewhere so it can serve as their oracle.
fn gaussian_self_star_at(beta: f64, theta0: f64, t: &[f64; 2]) -> Complex64 {
    let reach = 7.0 / beta.sqrt();
    let n = 80usize;
    let (nodes, weights) = gauss_legendre_rule(n);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let s0 = nodes[i] * reach;
        let w0 = weights[i] * reach;
        for j in 0..n {
            let s1 = nodes[j] * reach;
            let w1 = weights[j] * reach;
            let phase = 0.5 * theta0 * (t[0] * s1 - t[1] * s0);
            let d0 = t[0] - s0;
            let d1 = t[1] - s1;
            let val = (-beta * (d0 * d0 + d1 * d1)).exp() * (-beta * (s0 * s0 + s1 * s1)).exp();
            acc += Complex64::new(0.0, phase).exp() * val * (w0 * w1);
        }
    }
    acc
}

/// Ground state parameters (α, β) with f(t) = α e^{-β|t|²}, f ⋆_θ f = f, f* = f.
///
/// β is the root of the exponent-mismatch functional measured through the
/// quadrature oracle; α then normalizes the amplitude. The closed forms
/// (θ₀/2π, θ₀/4) are only used in tests.
pub fn ground_state(theta0: f64) -> Result<(f64, f64)> {
    if !(theta0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "theta0 must be positive, got {theta0}"
        )));
    }
    // idempotency forces (f⋆f)(t)/(f⋆f)(0) = e^{-β|t|²}; the defect is smooth
    // and monotone in β around the root
    let probe = [0.9 / theta0.sqrt(), 0.4 / theta0.sqrt()];
    let r2 = probe[0] * probe[0] + probe[1] * probe[1];
    let mismatch = |beta: f64| -> f64 {
        let at_t = gaussian_self_star_at(beta, theta0, &probe);
        let at_0 = gaussian_self_star_at(beta, theta0, &[0.0, 0.0]);
        (at_t / at_0).re.ln() + beta * r2
    };
    let mut lo = theta0 / 16.0;
    let mut hi = theta0;
    let (mut flo, fhi) = (mismatch(lo), mismatch(hi));
    if flo * fhi > 0.0 {
        return Err(Error::Fit(format!(
            "ground-state bracket failed: f({lo})={flo}, f({hi})={fhi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = mismatch(mid);
        if fm == 0.0 || (hi - lo) < 1e-15 * theta0 {
            lo = mid;
            break;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let beta = 0.5 * (lo + hi);
    let alpha = 1.0 / gaussian_self_star_at(beta, theta0, &[0.0, 0.0]).re;

    // sanity: idempotency at an independent point
    let check = [0.3, -0.8];
    let conv = gaussian_self_star_at(beta, theta0, &check) * alpha * alpha;
    let direct = alpha * (-beta * (check[0] * check[0] + check[1] * check[1])).exp();
    if (conv - direct).norm() > 1e-8 * alpha {
        return Err(Error::ContractViolation(format!(
            "ground state fails idempotency check: |f⋆f - f| = {:.3e}",
            (conv - direct).norm()
        )));
    }
    Ok((alpha, beta))
}

/// Raising on the left index: f_{k+1,l} ∝ A† · f_{k,l}. On polynomials,
/// P ↦ i(2 ∂_ū P − (2β + θ₀/2) u P)/√(2θ₀).
fn raise_left(p: &PolyGauss, theta0: f64) -> PolyGauss {
    let scale = Complex64::new(0.0, 1.0 / (2.0 * theta0).sqrt());
    let cu = -(2.0 * p.beta + theta0 / 2.0);
    let mut terms = Vec::with_capacity(2 * p.terms.len());
    for t in &p.terms {
        if t.b > 0 {
            terms.push(Term {
                a: t.a,
                b: t.b - 1,
                c: scale * t.c * (2.0 * t.b as f64),
            });
        }
        terms.push(Term {
            a: t.a + 1,
            b: t.b,
            c: scale * t.c * cu,
        });
    }
    PolyGauss::new(p.beta, terms)
}

/// Raising on the right index: f_{k,l+1} ∝ f_{k,l} · A. On polynomials,
/// P ↦ i(2 ∂_u P − (2β + θ₀/2) ū P)/√(2θ₀).
fn raise_right(p: &PolyGauss, theta0: f64) -> PolyGauss {
    let scale = Complex64::new(0.0, 1.0 / (2.0 * theta0).sqrt());
    let cu = -(2.0 * p.beta + theta0 / 2.0);
    let mut terms = Vec::with_capacity(2 * p.terms.len());
    for t in &p.terms {
        if t.a > 0 {
            terms.push(Term {
                a: t.a - 1,
                b: t.b,
                c: scale * t.c * (2.0 * t.a as f64),
            });
        }
        terms.push(Term {
            a: t.a,
            b: t.b + 1,
            c: scale * t.c * cu,
        });
    }
    PolyGauss::new(p.beta, terms)
}

/// How thoroughly `build_basis` verifies its own contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisCheck {
    /// Product rule over all ordered pairs within the f64-stable order bound
    /// (covers every pair when M ≤ 8).
    Full,
    /// All pairs within the leading 8×8 block plus this many seeded random
    /// pairs from the stable set.
    Sampled(usize),
}

/// The exact-moment star contraction is f64-accurate for combined ladder order
/// k₁+l₁+k₂+l₂ up to this bound, and for arbitrary pairs with every index ≤ 7
/// (worst measured defect 1.6e-8 there). Annihilating high-index patterns lose
/// accuracy earlier than diagonal ones; pairs outside the stable set are
/// exercised by grid-quadrature spot checks in tests instead.
pub const STAR_STABLE_ORDER: usize = 24;

fn star_check_allowed(k1: usize, l1: usize, k2: usize, l2: usize) -> bool {
    (k1.max(l1).max(k2).max(l2) <= 7) || (k1 + l1 + k2 + l2 <= STAR_STABLE_ORDER)
}

/// The assembled basis: exact symbols, grid samples, derivative tables and
/// the measured contract defects.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub truncation: usize,
    pub theta: ThetaMatrix,
    pub grid: Arc<MomentumGrid>,
    /// f_{k,l} at flat index k·M + l.
    pub symbols: Vec<PolyGauss>,
    /// (M², grid.len()) matrix of samples.
    pub samples: Array2<Complex64>,
    /// Common squared norm s² = (det θ)^{1/2}/(2π)^{d/2} of the basis symbols.
    pub norm_scale: f64,
    /// P^{(j)}[(k'l'), (kl)] = ⟨t_j f_{kl}, f_{k'l'}⟩ / s² (projection coefficients).
    pub derivative_tables: Vec<Array2<Complex64>>,
    pub ground_alpha: f64,
    pub ground_beta: f64,
    /// max |⟨f, f'⟩/s² − δδ| over all pairs, via grid quadrature.
    pub orthonormality_defect: f64,
    /// max ‖f₁ ⋆ f₂ − δ f₃‖₂ / s over checked pairs, via exact moments.
    pub product_rule_defect: f64,
}

impl BasisTable {
    #[inline]
    pub fn flat(&self, k: usize, l: usize) -> usize {
        k * self.truncation + l
    }

    pub fn symbol(&self, k: usize, l: usize) -> &PolyGauss {
        &self.symbols[self.flat(k, l)]
    }
}

/// Build the d=2 basis table with the default check policy
/// (full pair check for M ≤ 8, sampled above).
pub fn build_basis(
    truncation: usize,
    theta: &ThetaMatrix,
    grid: Arc<MomentumGrid>,
) -> Result<BasisTable> {
    let check = if truncation <= 8 {
        BasisCheck::Full
    } else {
        BasisCheck::Sampled(1500)
    };
    build_basis_checked(truncation, theta, grid, check)
}

pub fn build_basis_checked(
    truncation: usize,
    theta: &ThetaMatrix,
    grid: Arc<MomentumGrid>,
    check: BasisCheck,
) -> Result<BasisTable> {
    if theta.dim != 2 || grid.dim != 2 {
        return Err(Error::InvalidArgument(
            "the matrix basis is constructed for d = 2 only".into(),
        ));
    }
    if truncation < 1 {
        return Err(Error::InvalidArgument("truncation must be >= 1".into()));
    }
    let m = truncation;
    let theta0 = theta.theta0;
    let (alpha, beta) = ground_state(theta0)?;

    // ladder: first go up in k at l = 0, then rightwards in l
    let mut symbols: Vec<PolyGauss> = vec![PolyGauss::zero(beta); m * m];
    symbols[0] = PolyGauss::constant(beta, Complex64::new(alpha, 0.0));
    for k in 1..m {
        let prev = symbols[(k - 1) * m].clone();
        symbols[k * m] = raise_left(&prev, theta0).scale(Complex64::new(
            1.0 / (k as f64).sqrt(),
            0.0,
        ));
    }
    for k in 0..m {
        for l in 1..m {
            let prev = symbols[k * m + l - 1].clone();
            symbols[k * m + l] = raise_right(&prev, theta0).scale(Complex64::new(
                1.0 / (l as f64).sqrt(),
                0.0,
            ));
        }
    }

    let norm_scale = theta.basis_norm_sq();

    // grid samples
    let npts = grid.len();
    let mut samples = Array2::zeros((m * m, npts));
    for (row, sym) in symbols.iter().enumerate() {
        for i in 0..npts {
            samples[(row, i)] = sym.eval(grid.point(i));
        }
    }

    // orthonormality defect on the rescaled Gram, grid quadrature
    let mut ortho_defect = 0.0f64;
    let mut worst_pair = ((0, 0), (0, 0));
    for r1 in 0..m * m {
        for r2 in 0..m * m {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..npts {
                acc += Complex64::new(grid.weight(i), 0.0) * samples[(r1, i)] * samples[(r2, i)].conj();
            }
            let target = if r1 == r2 { 1.0 } else { 0.0 };
            let defect = (acc / norm_scale - target).norm();
            if defect > ortho_defect {
                ortho_defect = defect;
                worst_pair = ((r1 / m, r1 % m), (r2 / m, r2 % m));
            }
        }
    }

    // product rule defect through the exact moment contraction
    let s = norm_scale.sqrt();
    let mut prod_defect = 0.0f64;
    let mut worst_prod = ((0, 0), (0, 0));
    let check_pair = |k1: usize, l1: usize, k2: usize, l2: usize,
                          symbols: &[PolyGauss],
                          worst: &mut f64,
                          worst_at: &mut ((usize, usize), (usize, usize))| {
        let f1 = &symbols[k1 * m + l1];
        let f2 = &symbols[k2 * m + l2];
        let mut prod = f1.star(f2, theta0);
        if l1 == k2 {
            prod = prod.add(&symbols[k1 * m + l2].scale(Complex64::new(-1.0, 0.0)));
        }
        let defect = prod.l2_norm() / s;
        if defect > *worst {
            *worst = defect;
            *worst_at = ((k1, l1), (k2, l2));
        }
    };
    match check {
        BasisCheck::Full => {
            for k1 in 0..m {
                for l1 in 0..m {
                    for k2 in 0..m {
                        for l2 in 0..m {
                            if star_check_allowed(k1, l1, k2, l2) {
                                check_pair(
                                    k1, l1, k2, l2, &symbols, &mut prod_defect, &mut worst_prod,
                                );
                            }
                        }
                    }
                }
            }
        }
        BasisCheck::Sampled(extra) => {
            let head = m.min(8);
            for k1 in 0..head {
                for l1 in 0..head {
                    for k2 in 0..head {
                        for l2 in 0..head {
                            check_pair(k1, l1, k2, l2, &symbols, &mut prod_defect, &mut worst_prod);
                        }
                    }
                }
            }
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state as usize
            };
            let mut done = 0usize;
            while done < extra {
                let (k1, l1, k2, l2) = (next() % m, next() % m, next() % m, next() % m);
                if star_check_allowed(k1, l1, k2, l2) {
                    check_pair(k1, l1, k2, l2, &symbols, &mut prod_defect, &mut worst_prod);
                    done += 1;
                }
            }
        }
    }

    let tol = grid.tolerance();
    if ortho_defect > tol {
        return Err(Error::ContractViolation(format!(
            "basis orthonormality defect {ortho_defect:.3e} exceeds grid tolerance {tol:.3e}; \
             worst pair f_{:?} vs f_{:?}",
            worst_pair.0, worst_pair.1
        )));
    }
    if prod_defect > tol {
        return Err(Error::ContractViolation(format!(
            "basis product-rule defect {prod_defect:.3e} exceeds grid tolerance {tol:.3e}; \
             worst pair f_{:?} ⋆ f_{:?}",
            worst_prod.0, worst_prod.1
        )));
    }

    // derivative projection tables, exact
    let mut tables = Vec::with_capacity(2);
    for j in 0..2 {
        let mut table = Array2::zeros((m * m, m * m));
        for kl in 0..m * m {
            let tf = symbols[kl].mul_coordinate(j);
            for kpl in 0..m * m {
                table[(kpl, kl)] = tf.inner(&symbols[kpl]) / norm_scale;
            }
        }
        tables.push(table);
    }

    Ok(BasisTable {
        truncation: m,
        theta: theta.clone(),
        grid,
        symbols,
        samples,
        norm_scale,
        derivative_tables: tables,
        ground_alpha: alpha,
        ground_beta: beta,
        orthonormality_defect: ortho_defect,
        product_rule_defect: prod_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_grid, GridScheme};
    use std::f64::consts::PI;

    fn grid2() -> Arc<MomentumGrid> {
        Arc::new(make_grid(2, 8.0, 48, GridScheme::MidpointOffset).unwrap())
    }

    #[test]
    fn ground_state_matches_closed_form() {
        for &theta0 in &[2.0f64, 1.0, 3.5] {
            let (alpha, beta) = ground_state(theta0).unwrap();
            assert!(
                (alpha - theta0 / (2.0 * PI)).abs() < 1e-9,
                "alpha({theta0}) = {alpha}"
            );
            assert!((beta - theta0 / 4.0).abs() < 1e-9, "beta({theta0}) = {beta}");
        }
    }

    #[test]
    fn single_projection_table() {
        // M = 1: f₀₀* = f₀₀, f₀₀ ⋆ f₀₀ = f₀₀, ‖f₀₀‖₂² = s²
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let table = build_basis(1, &theta, grid2()).unwrap();
        let f = table.symbol(0, 0);
        let inv = f.involution();
        assert!(f.add(&inv.scale(Complex64::new(-1.0, 0.0))).l2_norm() < 1e-12);
        let ff = f.star(f, 2.0);
        assert!(ff.add(&f.scale(Complex64::new(-1.0, 0.0))).l2_norm() < 1e-10);
        assert!((f.l2_norm().powi(2) - table.norm_scale).abs() < 1e-10);
        assert!(table.orthonormality_defect < 1e-6);
    }

    #[test]
    fn gram_matrix_is_scaled_identity_m4() {
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let table = build_basis(4, &theta, grid2()).unwrap();
        assert!(
            table.orthonormality_defect < 1e-6,
            "gram defect {:.3e}",
            table.orthonormality_defect
        );
        assert!(
            table.product_rule_defect < 1e-9,
            "product defect {:.3e}",
            table.product_rule_defect
        );
    }

    #[test]
    fn matrix_unit_products() {
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let table = build_basis(3, &theta, grid2()).unwrap();
        let s = table.norm_scale.sqrt();
        // f₀₁ ⋆ f₁₀ = f₀₀
        let p = table.symbol(0, 1).star(table.symbol(1, 0), 2.0);
        let d = p.add(&table.symbol(0, 0).scale(Complex64::new(-1.0, 0.0)));
        assert!(d.l2_norm() / s < 1e-10);
        // f₁₀ ⋆ f₁₀ = 0
        let z = table.symbol(1, 0).star(table.symbol(1, 0), 2.0);
        assert!(z.l2_norm() / s < 1e-10);
    }

    #[test]
    fn involution_transposes_indices() {
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let table = build_basis(4, &theta, grid2()).unwrap();
        let s = table.norm_scale.sqrt();
        for k in 0..4 {
            for l in 0..4 {
                let inv = table.symbol(k, l).involution();
                let d = inv.add(&table.symbol(l, k).scale(Complex64::new(-1.0, 0.0)));
                assert!(
                    d.l2_norm() / s < 1e-10,
                    "f_{k}{l}* != f_{l}{k}: {:.3e}",
                    d.l2_norm() / s
                );
            }
        }
    }

    #[test]
    fn high_order_product_via_grid_quadrature() {
        // beyond the f64-stable zone of the exact contraction, the grid
        // twisted convolution still certifies the matrix-unit behaviour
        use crate::algebra::symbol::{twisted_convolution, WeylSymbol};
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let grid = Arc::new(make_grid(2, 10.5, 72, GridScheme::MidpointOffset).unwrap());
        let table =
            build_basis_checked(11, &theta, Arc::clone(&grid), BasisCheck::Sampled(50)).unwrap();
        let f = WeylSymbol::from_poly(table.symbol(10, 10).clone());
        let conv = twisted_convolution(&f, &f, &theta, &grid).unwrap();
        let cs = conv.samples.as_ref().unwrap();
        let want = WeylSymbol::from_poly(table.symbol(10, 10).clone());
        let mut num = 0.0f64;
        for i in 0..grid.len() {
            let w = want.eval(grid.point(i)).unwrap();
            num += grid.weight(i) * (cs[i] - w).norm_sqr();
        }
        let defect = num.sqrt() / table.norm_scale.sqrt();
        assert!(defect < 1e-5, "f_{{10,10}} ⋆ f_{{10,10}} defect {defect:.3e}");
    }

    #[test]
    fn product_rule_on_grid_quadrature_oracle() {
        // the exact-moment route against the grid twisted convolution on a few pairs
        use crate::algebra::symbol::{twisted_convolution, WeylSymbol};
        let theta = ThetaMatrix::new(2, 2.0).unwrap();
        let grid = grid2();
        let table = build_basis(3, &theta, Arc::clone(&grid)).unwrap();
        for (k1, l1, k2, l2) in [(0, 0, 0, 0), (0, 1, 1, 0), (1, 1, 1, 2), (2, 1, 0, 2)] {
            let f = WeylSymbol::from_poly(table.symbol(k1, l1).clone());
            let g = WeylSymbol::from_poly(table.symbol(k2, l2).clone());
            let conv = twisted_convolution(&f, &g, &theta, &grid).unwrap();
            let exact = table.symbol(k1, l1).star(table.symbol(k2, l2), 2.0);
            let exact_sym = WeylSymbol::from_poly(exact);
            let mut max_diff = 0.0f64;
            let cs = conv.samples.as_ref().unwrap();
            for i in 0..grid.len() {
                let want = exact_sym.eval(grid.point(i)).unwrap();
                max_diff = max_diff.max((cs[i] - want).norm());
            }
            assert!(max_diff < 1e-6, "pair ({k1}{l1},{k2}{l2}): {max_diff:.2e}");
        }
    }
}
