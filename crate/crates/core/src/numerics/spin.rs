//! Pauli (gamma) matrices for even dimension d and the direction matrix σ(t).

use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The d anticommuting self-adjoint involutions on ℂ^{N_d}, N_d = 2^{d/2}.
#[derive(Debug, Clone)]
pub struct SpinStructure {
    pub dim: usize,
    pub spin_dim: usize,
    pub gammas: Vec<Array2<Complex64>>,
}

fn pauli_x() -> Array2<Complex64> {
    ndarray::array![[ZERO, ONE], [ONE, ZERO]]
}

fn pauli_y() -> Array2<Complex64> {
    ndarray::array![[ZERO, -I], [I, ZERO]]
}

fn pauli_z() -> Array2<Complex64> {
    ndarray::array![[ONE, ZERO], [ZERO, -ONE]]
}

fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Fixed choice of Pauli matrices via iterated tensor products:
/// γ_{2m+1} = σ_z^{⊗m} ⊗ σ_x ⊗ 1…, γ_{2m+2} = σ_z^{⊗m} ⊗ σ_y ⊗ 1…
pub fn make_pauli(d: usize) -> Result<SpinStructure> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "spin structure needs even positive dimension, got {d}"
        )));
    }
    if d > 8 {
        return Err(Error::InvalidArgument(format!(
            "desk scale caps the dimension at 8, got {d}"
        )));
    }
    let half = d / 2;
    let spin_dim = 1usize << half;
    let eye2: Array2<Complex64> = Array2::eye(2);
    let mut gammas = Vec::with_capacity(d);
    for m in 0..half {
        for which in 0..2 {
            let mut factors: Vec<Array2<Complex64>> = Vec::with_capacity(half);
            for slot in 0..half {
                factors.push(if slot < m {
                    pauli_z()
                } else if slot == m {
                    if which == 0 {
                        pauli_x()
                    } else {
                        pauli_y()
                    }
                } else {
                    eye2.clone()
                });
            }
            let mut g = factors[0].clone();
            for f in &factors[1..] {
                g = kron(&g, f);
            }
            gammas.push(g);
        }
    }
    Ok(SpinStructure {
        dim: d,
        spin_dim,
        gammas,
    })
}

impl SpinStructure {
    /// Worst-case defect of γ_j γ_k + γ_k γ_j − 2 δ_{jk} I over all pairs.
    pub fn anticommutator_defect(&self) -> f64 {
        let eye: Array2<Complex64> = Array2::eye(self.spin_dim);
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for k in 0..self.dim {
                let anti = self.gammas[j].dot(&self.gammas[k]) + self.gammas[k].dot(&self.gammas[j]);
                let target = if j == k { &eye * Complex64::new(2.0, 0.0) } else { Array2::zeros((self.spin_dim, self.spin_dim)) };
                let defect = (&anti - &target)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                worst = worst.max(defect);
            }
        }
        worst
    }

    /// Worst deviation of any γ_j from self-adjointness.
    pub fn selfadjoint_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for g in &self.gammas {
            for i in 0..self.spin_dim {
                for j in 0..self.spin_dim {
                    worst = worst.max((g[(i, j)] - g[(j, i)].conj()).norm());
                }
            }
        }
        worst
    }
}

/// σ(t) = Σ_j γ_j t_j / |t|, the symbol of sgn(𝒟); requires t ≠ 0.
pub fn sigma_direction(spin: &SpinStructure, t: &[f64]) -> Array2<Complex64> {
    assert_eq!(t.len(), spin.dim);
    let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm > 0.0, "sigma_direction undefined at the origin");
    let mut out = Array2::zeros((spin.spin_dim, spin.spin_dim));
    for (j, g) in spin.gammas.iter().enumerate() {
        let c = Complex64::new(t[j] / norm, 0.0);
        out.zip_mut_with(g, |o, &gv| *o += c * gv);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d2_is_the_standard_pair() {
        let s = make_pauli(2).unwrap();
        assert_eq!(s.spin_dim, 2);
        assert_eq!(s.gammas[0], pauli_x());
        assert_eq!(s.gammas[1], pauli_y());
        assert!(s.anticommutator_defect() < 1e-14);
        assert!(s.selfadjoint_defect() < 1e-14);
    }

    #[test]
    fn d4_exhaustive_pairwise_check() {
        let s = make_pauli(4).unwrap();
        assert_eq!(s.spin_dim, 4);
        assert!(s.anticommutator_defect() < 1e-14);
        assert!(s.selfadjoint_defect() < 1e-14);
    }

    #[test]
    fn odd_or_bad_dimension_rejected() {
        assert!(make_pauli(3).is_err());
        assert!(make_pauli(0).is_err());
        assert!(make_pauli(10).is_err());
    }

    #[test]
    fn sigma_squares_to_identity() {
        for d in [2usize, 4] {
            let s = make_pauli(d).unwrap();
            let pts: Vec<Vec<f64>> = match d {
                2 => vec![vec![1.0, 0.0], vec![0.3, -2.0], vec![-1.5, 0.7]],
                _ => vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.3, -2.0, 1.1, 0.5]],
            };
            for t in pts {
                let sg = sigma_direction(&s, &t);
                let sq = sg.dot(&sg);
                let eye: Array2<Complex64> = Array2::eye(s.spin_dim);
                let defect = (&sq - &eye).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(defect < 1e-14, "d={d}: defect {defect:.2e}");
            }
        }
    }
}
