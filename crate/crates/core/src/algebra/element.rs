//! Schwartz-class algebra elements as truncated coefficient matrices, with the
//! trace τ_θ, L_p norms, partial derivatives and positive functional calculus.

use super::basis::BasisTable;
use super::poly::PolyGauss;
use super::symbol::WeylSymbol;
use super::theta::ThetaMatrix;
use crate::{linalg, Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// x = Σ a_{kl} U_θ(f^θ_{kl}) as the coefficient matrix a.
#[derive(Debug, Clone)]
pub struct MatrixElement {
    pub theta: ThetaMatrix,
    pub coeffs: Array2<Complex64>,
}

/// Flat JSON form used by the CLI for reproducible inputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixElementFile {
    pub d: usize,
    pub theta0: f64,
    #[serde(rename = "M")]
    pub truncation: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixElement {
    pub fn zero(truncation: usize, theta: &ThetaMatrix) -> Self {
        MatrixElement {
            theta: theta.clone(),
            coeffs: Array2::zeros((truncation, truncation)),
        }
    }

    pub fn matrix_unit(truncation: usize, k: usize, l: usize, theta: &ThetaMatrix) -> Self {
        let mut x = MatrixElement::zero(truncation, theta);
        x.coeffs[(k, l)] = Complex64::new(1.0, 0.0);
        x
    }

    pub fn from_coeffs(coeffs: Array2<Complex64>, theta: &ThetaMatrix) -> Result<Self> {
        if coeffs.nrows() != coeffs.ncols() {
            return Err(Error::DimensionMismatch(
                "coefficient matrix must be square".into(),
            ));
        }
        Ok(MatrixElement {
            theta: theta.clone(),
            coeffs,
        })
    }

    /// Seeded random Schwartz-like element: complex Gaussian entries with
    /// exponential decay away from the corner, so the truncation tail is tiny.
    pub fn random_schwartz<R: Rng>(
        truncation: usize,
        theta: &ThetaMatrix,
        rng: &mut R,
        decay: f64,
    ) -> Self {
        let coeffs = Array2::from_shape_fn((truncation, truncation), |(k, l)| {
            let damp = (-decay * (k + l) as f64).exp();
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * (2.0 * damp)
        });
        MatrixElement {
            theta: theta.clone(),
            coeffs,
        }
    }

    /// Seeded random positive element c† c with decaying entries.
    pub fn random_positive<R: Rng>(
        truncation: usize,
        theta: &ThetaMatrix,
        rng: &mut R,
        decay: f64,
    ) -> Self {
        let c = MatrixElement::random_schwartz(truncation, theta, rng, decay);
        let ct = c.adjoint();
        ct.mul(&c).unwrap()
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn adjoint(&self) -> Self {
        MatrixElement {
            theta: self.theta.clone(),
            coeffs: self.coeffs.t().mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        MatrixElement {
            theta: self.theta.clone(),
            coeffs: self.coeffs.mapv(|z| z * s),
        }
    }

    pub fn add(&self, other: &MatrixElement) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(MatrixElement {
            theta: self.theta.clone(),
            coeffs: &self.coeffs + &other.coeffs,
        })
    }

    /// Algebra product (matrix product of coefficients).
    pub fn mul(&self, other: &MatrixElement) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(MatrixElement {
            theta: self.theta.clone(),
            coeffs: self.coeffs.dot(&other.coeffs),
        })
    }

    fn check_compatible(&self, other: &MatrixElement) -> Result<()> {
        if self.truncation() != other.truncation() {
            return Err(Error::DimensionMismatch(format!(
                "truncations {} vs {}",
                self.truncation(),
                other.truncation()
            )));
        }
        if (self.theta.theta0 - other.theta.theta0).abs() > 1e-14 || self.theta.dim != other.theta.dim
        {
            return Err(Error::DimensionMismatch("theta matrices differ".into()));
        }
        Ok(())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = self.truncation();
        for i in 0..m {
            for j in 0..m {
                if (self.coeffs[(i, j)] - self.coeffs[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// τ_θ(x) = ((2π)^d det θ)^{1/2} Σ_k a_{kk}.
    pub fn trace_tau(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.truncation() {
            acc += self.coeffs[(k, k)];
        }
        acc * self.theta.trace_scale()
    }

    /// Rapid-decay semi-norm r_m(a) of the coefficient matrix.
    pub fn rapid_decay_seminorm(&self, m: u32) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.truncation() {
            for l in 0..self.truncation() {
                let wk = ((k + 1) as f64).powi(2 * m as i32);
                let wl = ((l + 1) as f64).powi(2 * m as i32);
                acc += wk * wl * self.coeffs[(k, l)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Share of the squared coefficient mass with max(k,l) ≥ M/2 (truncation-tail proxy).
    pub fn tail_mass(&self) -> f64 {
        let m = self.truncation();
        let mut tail = 0.0;
        let mut total = 0.0;
        for k in 0..m {
            for l in 0..m {
                let v = self.coeffs[(k, l)].norm_sqr();
                total += v;
                if k.max(l) >= m / 2 {
                    tail += v;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Schatten p-norm of the coefficient matrix alone (no trace scaling).
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        schatten(&self.coeffs, p)
    }

    /// ‖x‖_{L_p} = ((2π)^d det θ)^{1/(2p)} · ‖a‖_{S_p}; p = ∞ gives the operator norm of a.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "L_p norm needs p > 0, got {p}"
            )));
        }
        let sp = schatten(&self.coeffs, p)?;
        if p.is_infinite() {
            return Ok(sp);
        }
        Ok(self.theta.trace_norm_sq().powf(1.0 / (2.0 * p)) * sp)
    }

    /// ∂_j x through the projection table P^{(j)} of the basis.
    pub fn partial_derivative(&self, j: usize, table: &BasisTable) -> Result<MatrixElement> {
        if j >= self.theta.dim {
            return Err(Error::InvalidArgument(format!(
                "derivative index {j} out of range for d={}",
                self.theta.dim
            )));
        }
        if table.truncation != self.truncation() {
            return Err(Error::DimensionMismatch(format!(
                "basis truncation {} vs element truncation {}",
                table.truncation,
                self.truncation()
            )));
        }
        let m = self.truncation();
        let p = &table.derivative_tables[j];
        let mut out = Array2::zeros((m, m));
        // b_{k'l'} = Σ_{kl} P[(k'l'),(kl)] a_{kl}
        for kp in 0..m {
            for lp in 0..m {
                let row = kp * m + lp;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    for l in 0..m {
                        acc += p[(row, k * m + l)] * self.coeffs[(k, l)];
                    }
                }
                out[(kp, lp)] = acc;
            }
        }
        Ok(MatrixElement {
            theta: self.theta.clone(),
            coeffs: out,
        })
    }

    /// L₂-mass pushed past the truncation boundary by ∂_j (closed band form).
    pub fn derivative_leak(&self, _j: usize) -> f64 {
        // both A and A† shift one index by one; only the k = M-1 and l = M-1
        // lines leak, with ladder weight √M
        let m = self.truncation();
        let w = (m as f64) / (2.0 * self.theta.theta0);
        let mut acc = 0.0;
        for i in 0..m {
            acc += w * self.coeffs[(m - 1, i)].norm_sqr();
            acc += w * self.coeffs[(i, m - 1)].norm_sqr();
        }
        acc.sqrt()
    }

    /// Positive power x^p by functional calculus on the coefficient matrix.
    pub fn positive_root(&self, p: f64) -> Result<MatrixElement> {
        if !(p > 0.0) {
            return Err(Error::InvalidArgument("power must be positive".into()));
        }
        if !self.is_hermitian(1e-10) {
            return Err(Error::NotPositive(
                "coefficient matrix is not self-adjoint".into(),
            ));
        }
        let (vals, vecs) = linalg::hermitian_eigen(&self.coeffs)?;
        let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if let Some(worst) = vals.iter().cloned().reduce(f64::min) {
            if worst < -1e-10 * scale.max(1.0) {
                return Err(Error::NotPositive(format!(
                    "materially negative spectrum: min eigenvalue {worst:.3e}"
                )));
            }
        }
        let m = self.truncation();
        let mut out = Array2::zeros((m, m));
        for (idx, &lam) in vals.iter().enumerate() {
            let powered = if lam <= 0.0 { 0.0 } else { lam.powf(p) };
            if powered == 0.0 {
                continue;
            }
            for i in 0..m {
                for j in 0..m {
                    out[(i, j)] += vecs[(i, idx)] * Complex64::new(powered, 0.0) * vecs[(j, idx)].conj();
                }
            }
        }
        Ok(MatrixElement {
            theta: self.theta.clone(),
            coeffs: out,
        })
    }

    /// Weyl symbol Σ a_{kl} f_{kl} (exact polynomial form).
    pub fn to_symbol(&self, table: &BasisTable) -> Result<WeylSymbol> {
        if table.truncation != self.truncation() {
            return Err(Error::DimensionMismatch(format!(
                "basis truncation {} vs element truncation {}",
                table.truncation,
                self.truncation()
            )));
        }
        let m = self.truncation();
        let mut acc = PolyGauss::zero(table.ground_beta);
        for k in 0..m {
            for l in 0..m {
                let c = self.coeffs[(k, l)];
                if c.norm() > 0.0 {
                    acc = acc.add(&table.symbol(k, l).scale(c));
                }
            }
        }
        Ok(WeylSymbol::from_poly(acc))
    }

    /// Coefficients a_{kl} = ⟨f, f_{kl}⟩ / s² by grid quadrature.
    pub fn from_symbol(symbol: &WeylSymbol, table: &BasisTable) -> Result<MatrixElement> {
        let grid = &table.grid;
        let samples = symbol.samples_on(grid)?;
        let m = table.truncation;
        let mut coeffs = Array2::zeros((m, m));
        for k in 0..m {
            for l in 0..m {
                let row = table.flat(k, l);
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..grid.len() {
                    acc += Complex64::new(grid.weight(i), 0.0)
                        * samples[i]
                        * table.samples[(row, i)].conj();
                }
                coeffs[(k, l)] = acc / table.norm_scale;
            }
        }
        Ok(MatrixElement {
            theta: table.theta.clone(),
            coeffs,
        })
    }

    pub fn to_file(&self) -> MatrixElementFile {
        let m = self.truncation();
        let mut re = Vec::with_capacity(m * m);
        let mut im = Vec::with_capacity(m * m);
        for k in 0..m {
            for l in 0..m {
                re.push(self.coeffs[(k, l)].re);
                im.push(self.coeffs[(k, l)].im);
            }
        }
        MatrixElementFile {
            d: self.theta.dim,
            theta0: self.theta.theta0,
            truncation: m,
            re,
            im,
        }
    }

    pub fn from_file(file: &MatrixElementFile) -> Result<Self> {
        let m = file.truncation;
        if file.re.len() != m * m || file.im.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "element file claims M={m} but carries {} / {} entries",
                file.re.len(),
                file.im.len()
            )));
        }
        let theta = ThetaMatrix::new(file.d, file.theta0)?;
        let coeffs = Array2::from_shape_fn((m, m), |(k, l)| {
            Complex64::new(file.re[k * m + l], file.im[k * m + l])
        });
        Ok(MatrixElement { theta, coeffs })
    }
}

/// Schatten p-norm of a dense complex matrix (p = ∞ gives the spectral norm).
pub fn schatten(a: &Array2<Complex64>, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Schatten norm needs p > 0, got {p}"
        )));
    }
    let sv = linalg::singular_values(a)?;
    if p.is_infinite() {
        return Ok(sv.first().copied().unwrap_or(0.0));
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}
