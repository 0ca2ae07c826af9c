//! Polynomial × Gaussian symbols on ℝ², exact under the twisted-convolution algebra.
//!
//! A `PolyGauss` is Σ c_{ab} u^a ū^b e^{-β|t|²} with u = t₁ + i t₂. The matrix
//! basis, its ladder operators, L₂ inner products and the twisted convolution
//! of two such symbols all stay inside this class with closed-form coefficients,
//! which gives machine-precision oracles next to the grid-quadrature routes.

use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO_CUTOFF: f64 = 1e-300;

/// One monomial term c · u^a · ū^b.
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub a: u32,
    pub b: u32,
    pub c: Complex64,
}

/// Sparse polynomial in (u, ū) times the Gaussian e^{-β|t|²}.
#[derive(Debug, Clone)]
pub struct PolyGauss {
    pub beta: f64,
    pub terms: Vec<Term>,
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// ∫ u^p ū^q e^{-2β|t|²} dt over ℝ²; zero unless p = q by angular integration.
fn radial_moment(two_beta: f64, p: u32) -> f64 {
    PI * factorial(p) / two_beta.powi(p as i32 + 1)
}

impl PolyGauss {
    pub fn new(beta: f64, terms: Vec<Term>) -> Self {
        let mut pg = PolyGauss { beta, terms };
        pg.compress();
        pg
    }

    pub fn constant(beta: f64, c: Complex64) -> Self {
        PolyGauss {
            beta,
            terms: vec![Term { a: 0, b: 0, c }],
        }
    }

    pub fn zero(beta: f64) -> Self {
        PolyGauss {
            beta,
            terms: Vec::new(),
        }
    }

    /// Merge duplicate monomials and drop negligible ones.
    fn compress(&mut self) {
        self.terms.sort_by_key(|t| (t.a, t.b));
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match out.last_mut() {
                Some(last) if last.a == t.a && last.b == t.b => last.c += t.c,
                _ => out.push(*t),
            }
        }
        out.retain(|t| t.c.norm() > ZERO_CUTOFF);
        self.terms = out;
    }

    #[inline]
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        let u = Complex64::new(t[0], t[1]);
        let ub = u.conj();
        let r2 = t[0] * t[0] + t[1] * t[1];
        let g = (-self.beta * r2).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        // small power cache; degrees stay modest
        for term in &self.terms {
            acc += term.c * u.powu(term.a) * ub.powu(term.b);
        }
        acc * g
    }

    pub fn scale(&self, s: Complex64) -> Self {
        PolyGauss {
            beta: self.beta,
            terms: self
                .terms
                .iter()
                .map(|t| Term { a: t.a, b: t.b, c: t.c * s })
                .collect(),
        }
    }

    pub fn add(&self, other: &PolyGauss) -> Self {
        assert!(
            (self.beta - other.beta).abs() < 1e-12,
            "polynomial symbols must share the Gaussian exponent"
        );
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PolyGauss::new(self.beta, terms)
    }

    /// Involution f*(t) = conj(f(-t)): (a,b,c) ↦ (b,a, conj(c)·(-1)^{a+b}).
    pub fn involution(&self) -> Self {
        PolyGauss::new(
            self.beta,
            self.terms
                .iter()
                .map(|t| Term {
                    a: t.b,
                    b: t.a,
                    c: t.c.conj() * if (t.a + t.b) % 2 == 0 { 1.0 } else { -1.0 },
                })
                .collect(),
        )
    }

    /// Multiplication by the coordinate t_j (j = 0 or 1).
    pub fn mul_coordinate(&self, j: usize) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            match j {
                // t₁ = (u + ū)/2
                0 => {
                    let half = t.c * 0.5;
                    terms.push(Term { a: t.a + 1, b: t.b, c: half });
                    terms.push(Term { a: t.a, b: t.b + 1, c: half });
                }
                // t₂ = (u − ū)/(2i)
                1 => {
                    let c = t.c * Complex64::new(0.0, -0.5);
                    terms.push(Term { a: t.a + 1, b: t.b, c });
                    terms.push(Term { a: t.a, b: t.b + 1, c: -c });
                }
                _ => panic!("coordinate index out of range for d=2"),
            }
        }
        PolyGauss::new(self.beta, terms)
    }

    /// L₂ inner product ∫ f conj(g) dt, exact through Gaussian moments.
    pub fn inner(&self, other: &PolyGauss) -> Complex64 {
        assert!((self.beta - other.beta).abs() < 1e-12);
        let two_beta = 2.0 * self.beta;
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.terms {
            for o in &other.terms {
                // conj(g) contributes ū^{a'} u^{b'}
                let p = s.a + o.b;
                let q = s.b + o.a;
                if p == q {
                    acc += s.c * o.c.conj() * radial_moment(two_beta, p);
                }
            }
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Twisted convolution (f ⋆_θ g)(t) = ∫ e^{(i/2)⟨t,θs⟩} f(t−s) g(s) ds,
    /// exact for symbols sharing the exponent β; requires the block θ with
    /// pairing ⟨t,θs⟩ = θ₀ (t₁s₂ − t₂s₁).
    ///
    /// Derivation: at β = θ₀/4 the Gaussian factors and the phase combine into
    /// e^{-c₀|s|² + c₀ ū su} with c₀ = 2β and su = s₁+is₂ (the sū part cancels),
    /// and ∫ su^P sū^Q e^{-c₀|s|² + λ su} ds = (π/c₀)·Q!/(Q−P)!·ū^{Q−P}/c₀^P
    /// at λ = c₀ ū (zero for P > Q).
    pub fn star(&self, other: &PolyGauss, theta0: f64) -> Self {
        assert!((self.beta - other.beta).abs() < 1e-12);
        debug_assert!(
            (self.beta - theta0 / 4.0).abs() < 1e-6,
            "twisted-convolution closed form assumes the ground-state exponent"
        );
        let c0 = 2.0 * self.beta;
        let pref = PI / c0;
        let mut terms: Vec<Term> = Vec::new();
        for t1 in &self.terms {
            // binomial expansion of (u-su)^a (ū-sū)^b
            for p in 0..=t1.a {
                let ba = binomial(t1.a, p);
                for q in 0..=t1.b {
                    let bb = binomial(t1.b, q);
                    let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                    let w1 = t1.c * (ba * bb * sign);
                    for t2 in &other.terms {
                        let pp = p + t2.a;
                        let qq = q + t2.b;
                        if pp > qq {
                            continue;
                        }
                        // moment (π/c₀)·Q!/(Q−P)! / c₀^P, carrying ū^{Q−P}
                        let mut mom = pref;
                        for m in 0..pp {
                            mom *= (qq - m) as f64;
                        }
                        mom /= c0.powi(pp as i32);
                        terms.push(Term {
                            a: t1.a - p,
                            b: t1.b - q + (qq - pp),
                            c: w1 * t2.c * mom,
                        });
                    }
                }
            }
        }
        PolyGauss::new(self.beta, terms)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.a + t.b).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(theta0: f64) -> PolyGauss {
        PolyGauss::constant(theta0 / 4.0, Complex64::new(theta0 / (2.0 * PI), 0.0))
    }

    #[test]
    fn ground_state_is_idempotent() {
        let theta0 = 2.0;
        let f = ground(theta0);
        let ff = f.star(&f, theta0);
        assert_eq!(ff.terms.len(), 1);
        assert!((ff.terms[0].c - f.terms[0].c).norm() < 1e-15);
        // norm² = detθ^{1/2}/(2π)^{d/2} = θ₀/(2π)
        assert!((f.inner(&f).re - theta0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn involution_is_an_involution() {
        let f = PolyGauss::new(
            0.5,
            vec![
                Term { a: 2, b: 1, c: Complex64::new(1.0, -0.5) },
                Term { a: 0, b: 3, c: Complex64::new(-0.25, 2.0) },
            ],
        );
        let g = f.involution().involution();
        assert_eq!(f.terms.len(), g.terms.len());
        for (a, b) in f.terms.iter().zip(&g.terms) {
            assert!((a.c - b.c).norm() < 1e-15);
            assert_eq!((a.a, a.b), (b.a, b.b));
        }
    }

    #[test]
    fn star_matches_brute_force_quadrature() {
        // exact contraction vs dense 2-D quadrature of the defining integral
        let theta0 = 2.0;
        let f = PolyGauss::new(
            theta0 / 4.0,
            vec![
                Term { a: 1, b: 0, c: Complex64::new(0.3, 0.1) },
                Term { a: 0, b: 0, c: Complex64::new(1.0, 0.0) },
            ],
        );
        let g = PolyGauss::new(
            theta0 / 4.0,
            vec![
                Term { a: 0, b: 1, c: Complex64::new(-0.2, 0.4) },
                Term { a: 1, b: 1, c: Complex64::new(0.05, 0.0) },
            ],
        );
        let exact = f.star(&g, theta0);

        let n = 220;
        let half = 9.0;
        let h = 2.0 * half / n as f64;
        for &t in &[[0.4f64, -0.2], [1.1, 0.6], [0.0, 1.3]] {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let s = [-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h];
                    let phase = 0.5 * theta0 * (t[0] * s[1] - t[1] * s[0]);
                    let diff = [t[0] - s[0], t[1] - s[1]];
                    acc += Complex64::new(0.0, phase).exp() * f.eval(&diff) * g.eval(&s) * (h * h);
                }
            }
            let rel = (acc - exact.eval(&t)).norm() / exact.eval(&t).norm().max(1e-12);
            assert!(rel < 1e-8, "t={t:?}: rel={rel:.3e}");
        }
    }

    #[test]
    fn inner_matches_quadrature() {
        let f = PolyGauss::new(
            0.5,
            vec![
                Term { a: 2, b: 0, c: Complex64::new(0.7, 0.0) },
                Term { a: 0, b: 1, c: Complex64::new(0.0, 1.0) },
            ],
        );
        let g = PolyGauss::new(
            0.5,
            vec![
                Term { a: 1, b: 1, c: Complex64::new(1.0, 0.3) },
                Term { a: 2, b: 0, c: Complex64::new(-0.2, 0.0) },
            ],
        );
        let exact = f.inner(&g);
        let n = 260;
        let half = 10.0;
        let h = 2.0 * half / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let t = [-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h];
                acc += f.eval(&t) * g.eval(&t).conj() * (h * h);
            }
        }
        assert!((acc - exact).norm() < 1e-9, "{acc} vs {exact}");
    }
}
