//! Weyl symbols: callables on ℝ^d with cached grid samples, the involution,
//! and the twisted convolution evaluated by grid quadrature.

use super::poly::PolyGauss;
use super::theta::ThetaMatrix;
use crate::numerics::MomentumGrid;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

pub type SymbolFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// How a symbol produces values.
#[derive(Clone)]
pub enum SymbolEval {
    /// Exact polynomial × Gaussian (d = 2).
    Poly(PolyGauss),
    /// Arbitrary callable.
    Callable(SymbolFn),
    /// Known only through its samples on the attached grid
    /// (e.g. the output of a grid twisted convolution).
    GridOnly,
}

impl std::fmt::Debug for SymbolEval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymbolEval::Poly(p) => write!(f, "Poly(beta={}, terms={})", p.beta, p.terms.len()),
            SymbolEval::Callable(_) => write!(f, "Callable"),
            SymbolEval::GridOnly => write!(f, "GridOnly"),
        }
    }
}

/// A symbol f: ℝ^d → ℂ together with (optional) cached samples on a grid.
#[derive(Debug, Clone)]
pub struct WeylSymbol {
    pub dim: usize,
    pub eval: SymbolEval,
    pub grid: Option<Arc<MomentumGrid>>,
    pub samples: Option<Arc<Vec<Complex64>>>,
}

impl WeylSymbol {
    pub fn from_poly(p: PolyGauss) -> Self {
        WeylSymbol {
            dim: 2,
            eval: SymbolEval::Poly(p),
            grid: None,
            samples: None,
        }
    }

    pub fn from_fn(dim: usize, f: SymbolFn) -> Self {
        WeylSymbol {
            dim,
            eval: SymbolEval::Callable(f),
            grid: None,
            samples: None,
        }
    }

    /// Centered Gaussian e^{-c|t|²}.
    pub fn gaussian(dim: usize, c: f64) -> Self {
        WeylSymbol::from_fn(
            dim,
            Arc::new(move |t: &[f64]| {
                Complex64::new((-c * t.iter().map(|x| x * x).sum::<f64>()).exp(), 0.0)
            }),
        )
    }

    pub fn from_samples(grid: Arc<MomentumGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples on a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(WeylSymbol {
            dim: grid.dim,
            eval: SymbolEval::GridOnly,
            grid: Some(grid),
            samples: Some(Arc::new(values)),
        })
    }

    pub fn is_callable(&self) -> bool {
        !matches!(self.eval, SymbolEval::GridOnly)
    }

    /// Point evaluation; grid-only symbols cannot be evaluated off their grid.
    pub fn eval(&self, t: &[f64]) -> Result<Complex64> {
        match &self.eval {
            SymbolEval::Poly(p) => Ok(p.eval(t)),
            SymbolEval::Callable(f) => Ok(f(t)),
            SymbolEval::GridOnly => Err(Error::InvalidArgument(
                "symbol is grid-only; it cannot be evaluated off its grid".into(),
            )),
        }
    }

    /// Samples on `grid`, reusing the cache when the geometry matches.
    pub fn samples_on(&self, grid: &Arc<MomentumGrid>) -> Result<Arc<Vec<Complex64>>> {
        if let (Some(g), Some(s)) = (&self.grid, &self.samples) {
            if g.same_geometry(grid) {
                return Ok(Arc::clone(s));
            }
        }
        match &self.eval {
            SymbolEval::GridOnly => Err(Error::GridMismatch(
                "grid-only symbol sampled on a different grid".into(),
            )),
            _ => {
                let vals: Vec<Complex64> = (0..grid.len())
                    .map(|i| self.eval(grid.point(i)))
                    .collect::<Result<_>>()?;
                Ok(Arc::new(vals))
            }
        }
    }

    /// Attach cached samples for `grid`.
    pub fn with_samples(mut self, grid: Arc<MomentumGrid>) -> Result<Self> {
        let s = self.samples_on(&grid)?;
        self.grid = Some(grid);
        self.samples = Some(s);
        Ok(self)
    }

    /// Involution f*(t) = conj(f(−t)).
    pub fn involution(&self) -> Result<Self> {
        match &self.eval {
            SymbolEval::Poly(p) => Ok(WeylSymbol::from_poly(p.involution())),
            SymbolEval::Callable(f) => {
                let f = Arc::clone(f);
                let dim = self.dim;
                Ok(WeylSymbol::from_fn(
                    dim,
                    Arc::new(move |t: &[f64]| {
                        let neg: Vec<f64> = t.iter().map(|x| -x).collect();
                        f(&neg).conj()
                    }),
                ))
            }
            SymbolEval::GridOnly => {
                // symmetric tensor grids contain −t for every node t
                let grid = self.grid.as_ref().unwrap();
                let samples = self.samples.as_ref().unwrap();
                let n = grid.points_per_axis;
                let d = grid.dim;
                let mut out = vec![Complex64::new(0.0, 0.0); samples.len()];
                for (i, slot) in out.iter_mut().enumerate() {
                    // per-axis index reversal maps t ↦ −t on midpoint/GL grids
                    let mut rest = i;
                    let mut j = 0usize;
                    let mut stride = grid.len() / n;
                    for _ in 0..d {
                        let idx = rest / stride;
                        rest %= stride;
                        j += (n - 1 - idx) * stride;
                        stride /= n;
                    }
                    *slot = samples[j].conj();
                }
                WeylSymbol::from_samples(Arc::clone(grid), out)
            }
        }
    }

    /// Pointwise product with the coordinate t_j (symbol of ∂_j on the algebra side).
    pub fn mul_coordinate(&self, j: usize) -> Result<Self> {
        if j >= self.dim {
            return Err(Error::InvalidArgument(format!(
                "coordinate index {j} out of range for d={}",
                self.dim
            )));
        }
        match &self.eval {
            SymbolEval::Poly(p) => Ok(WeylSymbol::from_poly(p.mul_coordinate(j))),
            SymbolEval::Callable(f) => {
                let f = Arc::clone(f);
                Ok(WeylSymbol::from_fn(
                    self.dim,
                    Arc::new(move |t: &[f64]| Complex64::new(t[j], 0.0) * f(t)),
                ))
            }
            SymbolEval::GridOnly => {
                let grid = self.grid.as_ref().unwrap();
                let samples = self.samples.as_ref().unwrap();
                let vals = (0..grid.len())
                    .map(|i| Complex64::new(grid.point(i)[j], 0.0) * samples[i])
                    .collect();
                WeylSymbol::from_samples(Arc::clone(grid), vals)
            }
        }
    }

    /// Grid L₂ norm: (Σ w |f|²)^{1/2}.
    pub fn l2_norm_on(&self, grid: &Arc<MomentumGrid>) -> Result<f64> {
        let s = self.samples_on(grid)?;
        Ok((0..grid.len())
            .map(|i| grid.weight(i) * s[i].norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Grid inner product ⟨f, g⟩ = Σ w f conj(g).
    pub fn inner_on(&self, other: &WeylSymbol, grid: &Arc<MomentumGrid>) -> Result<Complex64> {
        let a = self.samples_on(grid)?;
        let b = other.samples_on(grid)?;
        Ok((0..grid.len())
            .map(|i| Complex64::new(grid.weight(i), 0.0) * a[i] * b[i].conj())
            .sum())
    }
}

/// Twisted convolution by grid quadrature:
/// (f ⋆_θ g)(t_i) = Σ_j w_j e^{(i/2)⟨t_i, θ s_j⟩} f(t_i − s_j) g(s_j).
///
/// The left factor must be callable (it is evaluated at differences);
/// the right factor only needs samples on the grid.
pub fn twisted_convolution(
    f: &WeylSymbol,
    g: &WeylSymbol,
    theta: &ThetaMatrix,
    grid: &Arc<MomentumGrid>,
) -> Result<WeylSymbol> {
    if f.dim != theta.dim || g.dim != theta.dim || grid.dim != theta.dim {
        return Err(Error::DimensionMismatch(
            "symbol/theta/grid dimensions differ".into(),
        ));
    }
    if !f.is_callable() {
        return Err(Error::GridMismatch(
            "left twisted-convolution factor must be callable off-grid".into(),
        ));
    }
    let gs = g.samples_on(grid)?;
    let n = grid.len();
    let d = grid.dim;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out.par_iter_mut().enumerate().try_for_each(
        |(i, slot)| -> Result<()> {
            let ti = grid.point(i);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut diff = vec![0.0f64; d];
            for j in 0..n {
                let sj = grid.point(j);
                for a in 0..d {
                    diff[a] = ti[a] - sj[a];
                }
                let phase = 0.5 * theta.pairing(ti, sj);
                let fval = f.eval(&diff)?;
                acc += Complex64::new(0.0, phase).exp() * fval * gs[j] * grid.weight(j);
            }
            *slot = acc;
            Ok(())
        },
    )?;
    WeylSymbol::from_samples(Arc::clone(grid), out)
}
