//! Kernel operators and their assembly routines.

use crate::algebra::{ThetaMatrix, WeylSymbol};
use crate::numerics::{sigma_direction, MomentumGrid, SpinStructure};
use crate::{linalg, Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Angular × radial multiplier symbol h(t) = g(t/|t|) · w(|t|).
#[derive(Clone)]
pub struct FullSymbol {
    pub angular: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub radial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
}

impl FullSymbol {
    pub fn new(
        angular: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        radial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        label: impl Into<String>,
    ) -> Self {
        FullSymbol {
            angular,
            radial,
            label: label.into(),
        }
    }

    /// Constant angular part, radial weight only.
    pub fn radial(radial: Arc<dyn Fn(f64) -> f64 + Send + Sync>, label: impl Into<String>) -> Self {
        FullSymbol::new(Arc::new(|_| 1.0), radial, label)
    }

    /// The Bessel-type weight (1 + |t|²)^{-β/2}.
    pub fn bessel_weight(beta: f64) -> Self {
        FullSymbol::radial(
            Arc::new(move |r| (1.0 + r * r).powf(-beta / 2.0)),
            format!("(1-Δ_θ)^(-{}/2)", beta),
        )
    }

    pub fn one() -> Self {
        FullSymbol::radial(Arc::new(|_| 1.0), "1")
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let r = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        debug_assert!(r > 0.0, "multiplier symbol evaluated at the origin");
        let dir: Vec<f64> = t.iter().map(|x| x / r).collect();
        (self.angular)(&dir) * (self.radial)(r)
    }
}

impl std::fmt::Debug for FullSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FullSymbol({})", self.label)
    }
}

/// Dense or diagonal matrix data of a discretized operator.
#[derive(Debug, Clone)]
pub enum OperatorData {
    Dense(Array2<Complex64>),
    Diagonal(Vec<Complex64>),
}

/// A discretized operator on (grid × spin), with Nystrom weights absorbed.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub grid: Arc<MomentumGrid>,
    pub spin_dim: usize,
    pub data: OperatorData,
    pub label: String,
}

impl KernelOperator {
    pub fn nrows(&self) -> usize {
        self.spin_dim * self.grid.len()
    }

    pub fn dense(&self) -> Array2<Complex64> {
        match &self.data {
            OperatorData::Dense(m) => m.clone(),
            OperatorData::Diagonal(d) => {
                let n = d.len();
                let mut m = Array2::zeros((n, n));
                for i in 0..n {
                    m[(i, i)] = d[i];
                }
                m
            }
        }
    }

    fn check_compatible(&self, other: &KernelOperator) -> Result<()> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "operators '{}' and '{}' live on different grids",
                self.label, other.label
            )));
        }
        if self.spin_dim != other.spin_dim {
            return Err(Error::DimensionMismatch(format!(
                "spin dimensions {} vs {}",
                self.spin_dim, other.spin_dim
            )));
        }
        Ok(())
    }

    /// Matrix product; the Nystrom weights are already absorbed, so the plain
    /// product is the discretized composition.
    pub fn compose(&self, other: &KernelOperator) -> Result<KernelOperator> {
        self.check_compatible(other)?;
        let data = match (&self.data, &other.data) {
            (OperatorData::Diagonal(a), OperatorData::Diagonal(b)) => {
                OperatorData::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            (OperatorData::Diagonal(a), OperatorData::Dense(b)) => {
                let mut m = b.clone();
                for (i, mut row) in m.rows_mut().into_iter().enumerate() {
                    let s = a[i];
                    row.mapv_inplace(|z| z * s);
                }
                OperatorData::Dense(m)
            }
            (OperatorData::Dense(a), OperatorData::Diagonal(b)) => {
                let mut m = a.clone();
                for (j, mut col) in m.columns_mut().into_iter().enumerate() {
                    let s = b[j];
                    col.mapv_inplace(|z| z * s);
                }
                OperatorData::Dense(m)
            }
            (OperatorData::Dense(a), OperatorData::Dense(b)) => {
                OperatorData::Dense(linalg::matmul(a, b)?)
            }
        };
        Ok(KernelOperator {
            grid: Arc::clone(&self.grid),
            spin_dim: self.spin_dim,
            data,
            label: format!("({})·({})", self.label, other.label),
        })
    }

    pub fn add(&self, other: &KernelOperator) -> Result<KernelOperator> {
        self.check_compatible(other)?;
        let data = match (&self.data, &other.data) {
            (OperatorData::Diagonal(a), OperatorData::Diagonal(b)) => {
                OperatorData::Diagonal(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (a, b) => {
                let mut m = match a {
                    OperatorData::Dense(m) => m.clone(),
                    OperatorData::Diagonal(_) => self.dense(),
                };
                match b {
                    OperatorData::Dense(mb) => m += mb,
                    OperatorData::Diagonal(d) => {
                        for i in 0..d.len() {
                            m[(i, i)] += d[i];
                        }
                    }
                }
                OperatorData::Dense(m)
            }
        };
        Ok(KernelOperator {
            grid: Arc::clone(&self.grid),
            spin_dim: self.spin_dim,
            data,
            label: format!("({})+({})", self.label, other.label),
        })
    }

    pub fn scale(&self, s: Complex64) -> KernelOperator {
        let data = match &self.data {
            OperatorData::Dense(m) => OperatorData::Dense(m.mapv(|z| z * s)),
            OperatorData::Diagonal(d) => {
                OperatorData::Diagonal(d.iter().map(|z| z * s).collect())
            }
        };
        KernelOperator {
            grid: Arc::clone(&self.grid),
            spin_dim: self.spin_dim,
            data,
            label: format!("{}·({})", s, self.label),
        }
    }

    pub fn adjoint(&self) -> KernelOperator {
        let data = match &self.data {
            OperatorData::Dense(m) => OperatorData::Dense(m.t().mapv(|z| z.conj())),
            OperatorData::Diagonal(d) => {
                OperatorData::Diagonal(d.iter().map(|z| z.conj()).collect())
            }
        };
        KernelOperator {
            grid: Arc::clone(&self.grid),
            spin_dim: self.spin_dim,
            data,
            label: format!("adj({})", self.label),
        }
    }

    pub fn commutator(&self, other: &KernelOperator) -> Result<KernelOperator> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        let mut out = ab.add(&ba.scale(Complex64::new(-1.0, 0.0)))?;
        out.label = format!("[{}, {}]", self.label, other.label);
        Ok(out)
    }

    /// Hilbert-Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        match &self.data {
            OperatorData::Dense(m) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            OperatorData::Diagonal(d) => d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Matrix trace.
    pub fn trace(&self) -> Complex64 {
        match &self.data {
            OperatorData::Dense(m) => (0..m.nrows()).map(|i| m[(i, i)]).sum(),
            OperatorData::Diagonal(d) => d.iter().sum(),
        }
    }

    /// Largest entry modulus of the difference (diagnostic).
    pub fn max_abs_diff(&self, other: &KernelOperator) -> Result<f64> {
        self.check_compatible(other)?;
        let a = self.dense();
        let b = other.dense();
        Ok((&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Diagonal multiplier operator h(t_i) (π₂(g)·w(∇_θ)); spin_dim 1.
pub fn assemble_multiplier(h: &FullSymbol, grid: &Arc<MomentumGrid>) -> Result<KernelOperator> {
    let n = grid.len();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let v = h.eval(grid.point(i));
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "multiplier '{}' is not finite at grid node {i}",
                h.label
            )));
        }
        diag.push(Complex64::new(v, 0.0));
    }
    Ok(KernelOperator {
        grid: Arc::clone(grid),
        spin_dim: 1,
        data: OperatorData::Diagonal(diag),
        label: h.label.clone(),
    })
}

/// Convolution-product operator π₁(U_θ(f))·h(∇_θ) with kernel
/// M_{ij} = √w_i e^{-(i/2)⟨t_i, θ t_j⟩} f(t_i − t_j) h(t_j) √w_j.
pub fn assemble_conv_product(
    f: &WeylSymbol,
    h: &FullSymbol,
    grid: &Arc<MomentumGrid>,
    theta: &ThetaMatrix,
) -> Result<KernelOperator> {
    if !f.is_callable() {
        return Err(Error::InvalidArgument(
            "convolution-product assembly evaluates f at node differences; the symbol must be callable"
                .into(),
        ));
    }
    if f.dim != grid.dim || theta.dim != grid.dim {
        return Err(Error::DimensionMismatch(
            "symbol/theta/grid dimension mismatch".into(),
        ));
    }
    let n = grid.len();
    let d = grid.dim;
    let sqrt_w: Vec<f64> = (0..n).map(|i| grid.weight(i).sqrt()).collect();
    let hval: Vec<f64> = (0..n).map(|j| h.eval(grid.point(j))).collect();
    let mut m = Array2::zeros((n, n));
    m.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .try_for_each(|(i, mut row)| -> Result<()> {
            let ti = grid.point(i);
            let mut diff = vec![0.0f64; d];
            for j in 0..n {
                let tj = grid.point(j);
                for a in 0..d {
                    diff[a] = ti[a] - tj[a];
                }
                let phase = -0.5 * theta.pairing(ti, tj);
                let fv = f.eval(&diff)?;
                row[j] = Complex64::new(0.0, phase).exp() * fv * (sqrt_w[i] * hval[j] * sqrt_w[j]);
            }
            Ok(())
        })?;
    Ok(KernelOperator {
        grid: Arc::clone(grid),
        spin_dim: 1,
        data: OperatorData::Dense(m),
        label: format!("π₁(f)·{}", h.label),
    })
}

/// Quantized derivative đx = [sgn(𝒟), 1 ⊗ U_θ(f)] with N_d×N_d blocks
/// B_{ij} = (σ(t_i) − σ(t_j)) e^{-(i/2)⟨t_i, θ t_j⟩} f(t_i − t_j) √(w_i w_j).
///
/// sgn(𝒟) acts as multiplication by σ(t) = Σ_j γ_j t_j/|t| (since 𝒟² = |t|² by
/// anticommutation), and 1⊗U_θ(f) as the scalar convolution kernel on each spin
/// component; the commutator of a matrix multiplier with a scalar kernel is the
/// block kernel above.
pub fn assemble_quantized_derivative(
    f: &WeylSymbol,
    grid: &Arc<MomentumGrid>,
    spin: &SpinStructure,
    theta: &ThetaMatrix,
) -> Result<KernelOperator> {
    if !f.is_callable() {
        return Err(Error::InvalidArgument(
            "quantized-derivative assembly needs a callable symbol".into(),
        ));
    }
    if spin.dim != grid.dim || theta.dim != grid.dim {
        return Err(Error::DimensionMismatch(
            "spin/theta/grid dimension mismatch".into(),
        ));
    }
    let n = grid.len();
    let d = grid.dim;
    let nd = spin.spin_dim;
    let sqrt_w: Vec<f64> = (0..n).map(|i| grid.weight(i).sqrt()).collect();
    let sigmas: Vec<Array2<Complex64>> =
        (0..n).map(|i| sigma_direction(spin, grid.point(i))).collect();
    let mut m = Array2::zeros((n * nd, n * nd));
    // parallelize over grid rows; each fills nd matrix rows
    m.axis_chunks_iter_mut(ndarray::Axis(0), nd)
        .into_par_iter()
        .enumerate()
        .try_for_each(|(i, mut rows)| -> Result<()> {
            let ti = grid.point(i);
            let mut diff = vec![0.0f64; d];
            for j in 0..n {
                let tj = grid.point(j);
                for x in 0..d {
                    diff[x] = ti[x] - tj[x];
                }
                let phase = -0.5 * theta.pairing(ti, tj);
                let scalar =
                    Complex64::new(0.0, phase).exp() * f.eval(&diff)? * (sqrt_w[i] * sqrt_w[j]);
                let si = &sigmas[i];
                let sj = &sigmas[j];
                for a in 0..nd {
                    for b in 0..nd {
                        rows[(a, j * nd + b)] = (si[(a, b)] - sj[(a, b)]) * scalar;
                    }
                }
            }
            Ok(())
        })?;
    Ok(KernelOperator {
        grid: Arc::clone(grid),
        spin_dim: nd,
        data: OperatorData::Dense(m),
        label: "đx".into(),
    })
}

/// The approximant 𝒜(1+𝒟²)^{-1/2}, 𝒜 = Σ_j γ_j ⊗ (π₁(∂_j x) − Σ_k π₂(s_j s_k) π₁(∂_k x)),
/// with blocks
/// Σ_j γ_j [f_j(t_i−t_j') − (t_{i,j}/|t_i|) Σ_k (t_{i,k}/|t_i|) f_k(t_i−t_j')]
///   · e^{-(i/2)⟨t_i, θ t_j'⟩} (1+|t_j'|²)^{-1/2} √(w_i w_j'), where f_j(u) = u_j f(u).
pub fn assemble_approximant(
    f: &WeylSymbol,
    grid: &Arc<MomentumGrid>,
    spin: &SpinStructure,
    theta: &ThetaMatrix,
) -> Result<KernelOperator> {
    if !f.is_callable() {
        return Err(Error::InvalidArgument(
            "approximant assembly needs a callable symbol".into(),
        ));
    }
    if spin.dim != grid.dim || theta.dim != grid.dim {
        return Err(Error::DimensionMismatch(
            "spin/theta/grid dimension mismatch".into(),
        ));
    }
    let n = grid.len();
    let d = grid.dim;
    let nd = spin.spin_dim;
    let sqrt_w: Vec<f64> = (0..n).map(|i| grid.weight(i).sqrt()).collect();
    let bessel: Vec<f64> = (0..n)
        .map(|j| {
            let t = grid.point(j);
            (1.0 + t.iter().map(|x| x * x).sum::<f64>()).powf(-0.5)
        })
        .collect();
    let mut m = Array2::zeros((n * nd, n * nd));
    m.axis_chunks_iter_mut(ndarray::Axis(0), nd)
        .into_par_iter()
        .enumerate()
        .try_for_each(|(i, mut rows)| -> Result<()> {
            let ti = grid.point(i);
            let ri = ti.iter().map(|x| x * x).sum::<f64>().sqrt();
            let dir: Vec<f64> = ti.iter().map(|x| x / ri).collect();
            let mut diff = vec![0.0f64; d];
            for j in 0..n {
                let tj = grid.point(j);
                for x in 0..d {
                    diff[x] = ti[x] - tj[x];
                }
                let phase = -0.5 * theta.pairing(ti, tj);
                let base =
                    Complex64::new(0.0, phase).exp() * f.eval(&diff)? * (sqrt_w[i] * sqrt_w[j] * bessel[j]);
                // f_k(diff) = diff_k · f(diff); radial component Σ_k dir_k f_k
                let radial: f64 = (0..d).map(|k| dir[k] * diff[k]).sum();
                for (jj, gamma) in spin.gammas.iter().enumerate() {
                    let weight = Complex64::new(diff[jj] - dir[jj] * radial, 0.0) * base;
                    if weight.norm() == 0.0 {
                        continue;
                    }
                    for a in 0..nd {
                        for b in 0..nd {
                            let g = gamma[(a, b)];
                            if g.norm() != 0.0 {
                                rows[(a, j * nd + b)] += g * weight;
                            }
                        }
                    }
                }
            }
            Ok(())
        })?;
    Ok(KernelOperator {
        grid: Arc::clone(grid),
        spin_dim: nd,
        data: OperatorData::Dense(m),
        label: "A(1+D²)^(-1/2)".into(),
    })
}
