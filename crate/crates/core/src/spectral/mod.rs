//! Singular-value extraction, weak-Schatten quasi-norms, tail-coefficient and
//! decay-exponent estimation, and numerical versions of the abstract limit
//! lemmas (finite-rank stability, direct sums, convergence transfer).

use crate::assembly::{KernelOperator, OperatorData};
use crate::{linalg, Error, Result};
use serde::Serialize;

/// Nonincreasing singular-value sequence with provenance.
#[derive(Debug, Clone)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub label: String,
}

impl SingularSpectrum {
    pub fn from_values(mut values: Vec<f64>, label: impl Into<String>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        SingularSpectrum {
            values,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Merge with other spectra (block-diagonal direct sum).
    pub fn direct_sum(specs: &[&SingularSpectrum]) -> SingularSpectrum {
        let mut all: Vec<f64> = specs.iter().flat_map(|s| s.values.iter().copied()).collect();
        all.sort_by(|a, b| b.partial_cmp(a).unwrap());
        SingularSpectrum {
            values: all,
            label: "direct-sum".into(),
        }
    }

    /// CSV rows `n,mu,scaled` with scaled = (n+1)^{1/d}·mu.
    pub fn to_csv(&self, d: usize) -> String {
        let mut out = String::from("n,mu,scaled\n");
        let inv_d = 1.0 / d as f64;
        for (n, &mu) in self.values.iter().enumerate() {
            let scaled = ((n + 1) as f64).powf(inv_d) * mu;
            out.push_str(&format!("{n},{mu:.17e},{scaled:.17e}\n"));
        }
        out
    }
}

/// Full SVD of the operator, descending. Diagonal operators take the exact path.
pub fn singular_values(op: &KernelOperator) -> Result<SingularSpectrum> {
    let values = match &op.data {
        OperatorData::Diagonal(d) => d.iter().map(|z| z.norm()).collect(),
        OperatorData::Dense(m) => linalg::singular_values(m)?,
    };
    for v in &values {
        if !v.is_finite() {
            return Err(Error::Decomposition(format!(
                "singular value decomposition of '{}' produced a non-finite value",
                op.label
            )));
        }
    }
    Ok(SingularSpectrum::from_values(values, op.label.clone()))
}

/// Weak quasi-norm ‖T‖_{p,∞} = sup_n (n+1)^{1/p} μ_n.
pub fn weak_quasinorm(spec: &SingularSpectrum, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weak quasi-norm needs p > 0, got {p}"
        )));
    }
    Ok(spec
        .values
        .iter()
        .enumerate()
        .map(|(n, &mu)| ((n + 1) as f64).powf(1.0 / p) * mu)
        .fold(0.0, f64::max))
}

/// Fitted tail behaviour of a spectrum over a window.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    /// median of (n+1)^{1/d} μ_n over the window
    pub coefficient: f64,
    /// log-log least-squares slope of μ_n against (n+1)
    pub exponent: f64,
    pub window: (usize, usize),
    /// max |(n+1)^{1/d} μ_n − coefficient| over the window
    pub residual: f64,
}

/// Windowed estimate of lim n^{1/d} μ_n.
///
/// The coefficient is the median of the scaled sequence (robust against the
/// oscillation the asymptotics allow); the exponent comes from least squares
/// on log μ vs log (n+1) and is diagnostic only.
pub fn tail_coefficient(
    spec: &SingularSpectrum,
    d: usize,
    window: (usize, usize),
) -> Result<TailFit> {
    let (lo, hi) = window;
    if lo < 10 {
        return Err(Error::InvalidArgument(format!(
            "fit window must start past index 10, got {lo}"
        )));
    }
    if hi <= lo || hi > spec.len() {
        return Err(Error::InvalidArgument(format!(
            "fit window ({lo}, {hi}) not inside the spectrum of length {}",
            spec.len()
        )));
    }
    if hi - lo < 20 {
        return Err(Error::InvalidArgument(format!(
            "fit window ({lo}, {hi}) is too short; need at least 20 points"
        )));
    }
    let inv_d = 1.0 / d as f64;
    let mut scaled: Vec<f64> = (lo..hi)
        .map(|n| ((n + 1) as f64).powf(inv_d) * spec.values[n])
        .collect();
    scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = scaled.len() / 2;
    let coefficient = if scaled.len() % 2 == 0 {
        0.5 * (scaled[mid - 1] + scaled[mid])
    } else {
        scaled[mid]
    };
    let residual = (lo..hi)
        .map(|n| (((n + 1) as f64).powf(inv_d) * spec.values[n] - coefficient).abs())
        .fold(0.0, f64::max);

    // log-log slope, ignoring exact zeros
    let pts: Vec<(f64, f64)> = (lo..hi)
        .filter(|&n| spec.values[n] > 0.0)
        .map(|n| (((n + 1) as f64).ln(), spec.values[n].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Fit("window contains no positive singular values".into()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Fit("degenerate abscissa in log-log fit".into()));
    }
    let exponent = (n * sxy - sx * sy) / denom;

    Ok(TailFit {
        coefficient,
        exponent,
        window,
        residual,
    })
}

/// Default window fractions of the spectrum length.
pub fn default_window(len: usize) -> (usize, usize) {
    let lo = ((0.02 * len as f64).round() as usize).max(11);
    let hi = ((0.2 * len as f64).round() as usize).min(len);
    (lo, hi)
}

/// Outcome of the finite-rank stability experiment.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub base: TailFit,
    pub perturbed: TailFit,
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tail coefficients before and after adding a finite-rank (or fast-decaying)
/// perturbation spectrum; they must agree within the combined fit residuals.
///
/// The perturbed spectrum is modelled through the singular-value bound
/// μ(m+r, A+V) ≤ μ(m, A) + μ(r, V): the direct sum of the spectra dominates
/// the perturbed operator past the first `rank` indices, so re-fitting the
/// merged sequence past the joint window tests the stability statement.
pub fn finite_rank_stability(
    base: &SingularSpectrum,
    perturbation: &SingularSpectrum,
    d: usize,
    window: (usize, usize),
) -> Result<StabilityReport> {
    let fit_base = tail_coefficient(base, d, window)?;
    let merged = SingularSpectrum::direct_sum(&[base, perturbation]);
    let fit_pert = tail_coefficient(&merged, d, window)?;
    let difference = (fit_base.coefficient - fit_pert.coefficient).abs();
    let tolerance = 2.0 * (fit_base.residual + fit_pert.residual);
    Ok(StabilityReport {
        pass: difference <= tolerance,
        base: fit_base,
        perturbed: fit_pert,
        difference,
        tolerance,
    })
}

/// Direct-sum coefficient: fit the merged spectrum and compare with (Σ a_k^p)^{1/p}.
#[derive(Debug, Clone, Serialize)]
pub struct DirectSumReport {
    pub merged_coefficient: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

pub fn direct_sum_coefficient(
    specs: &[&SingularSpectrum],
    p: f64,
    window: (usize, usize),
) -> Result<DirectSumReport> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("empty direct sum".into()));
    }
    let mut predicted_p = 0.0;
    for s in specs {
        predicted_p += tail_coefficient_p(s, p, window)?.powf(p);
    }
    let predicted = predicted_p.powf(1.0 / p);
    let merged = SingularSpectrum::direct_sum(specs);
    let merged_coefficient = tail_coefficient_p(&merged, p, window)?;
    let relative_error = (merged_coefficient - predicted).abs() / predicted.max(1e-300);
    Ok(DirectSumReport {
        merged_coefficient,
        predicted,
        relative_error,
    })
}

/// Median of (n+1)^{1/p} μ_n over the window for non-integer p.
fn tail_coefficient_p(spec: &SingularSpectrum, p: f64, window: (usize, usize)) -> Result<f64> {
    let (lo, hi) = window;
    if hi <= lo || hi > spec.len() || hi - lo < 20 {
        return Err(Error::InvalidArgument(format!(
            "fit window ({lo}, {hi}) invalid for spectrum of length {}",
            spec.len()
        )));
    }
    let mut scaled: Vec<f64> = (lo..hi)
        .map(|n| ((n + 1) as f64).powf(1.0 / p) * spec.values[n])
        .collect();
    scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = scaled.len() / 2;
    Ok(if scaled.len() % 2 == 0 {
        0.5 * (scaled[mid - 1] + scaled[mid])
    } else {
        scaled[mid]
    })
}

/// One stage of a convergence-transfer experiment: an approximant's fitted
/// coefficient together with its weak-norm distance proxy to the target.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStage {
    pub coefficient: f64,
    /// max over the window of (n+1)^{1/p} μ(n, T_k − T)
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub stages: Vec<ConvergenceStage>,
    pub limit_estimate: f64,
    pub deltas_decreasing: bool,
}

/// If δ_k ↓ 0, the target coefficient is lim a_k; flags non-decreasing deltas.
pub fn convergence_transfer(stages: Vec<ConvergenceStage>) -> Result<ConvergenceReport> {
    if stages.is_empty() {
        return Err(Error::InvalidArgument("no convergence stages".into()));
    }
    let mut decreasing = true;
    for w in stages.windows(2) {
        if w[1].delta > w[0].delta + 1e-12 {
            decreasing = false;
        }
    }
    let limit_estimate = stages.last().unwrap().coefficient;
    Ok(ConvergenceReport {
        stages,
        limit_estimate,
        deltas_decreasing: decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_multiplier, FullSymbol};
    use crate::numerics::{make_grid, seeded_rng, GridScheme};
    use ndarray::Array2;
    use num_complex::Complex64;
    use rand::Rng;
    use std::sync::Arc;

    fn power_spectrum(n: usize, p: f64) -> SingularSpectrum {
        SingularSpectrum::from_values(
            (0..n).map(|k| ((k + 1) as f64).powf(-1.0 / p)).collect(),
            "synthetic",
        )
    }

    #[test]
    fn diagonal_multiplier_spectrum_is_exact() {
        let grid = Arc::new(make_grid(2, 4.0, 8, GridScheme::MidpointOffset).unwrap());
        let op = assemble_multiplier(&FullSymbol::bessel_weight(1.0), &grid).unwrap();
        let spec = singular_values(&op).unwrap();
        let mut direct: Vec<f64> = (0..grid.len())
            .map(|i| {
                let t = grid.point(i);
                (1.0 + t[0] * t[0] + t[1] * t[1]).powf(-0.5)
            })
            .collect();
        direct.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in spec.values.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_matrix_has_one_singular_value() {
        let n = 12;
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new((i + 1) as f64, 0.0) * Complex64::new(0.0, (j + 1) as f64);
            }
        }
        let grid = Arc::new(make_grid(2, 2.0, 2, GridScheme::MidpointOffset).unwrap());
        let op = KernelOperator {
            grid,
            spin_dim: 3,
            data: OperatorData::Dense(m),
            label: "rank1".into(),
        };
        let spec = singular_values(&op).unwrap();
        assert!(spec.values[0] > 1.0);
        for &v in &spec.values[1..] {
            assert!(v < 1e-10 * spec.values[0]);
        }
    }

    #[test]
    fn quasinorm_examples() {
        let spec = power_spectrum(500, 2.0);
        assert!((weak_quasinorm(&spec, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let zero = SingularSpectrum::from_values(vec![0.0; 50], "zero");
        assert_eq!(weak_quasinorm(&zero, 1.0).unwrap(), 0.0);
        assert!(weak_quasinorm(&spec, 0.0).is_err());
    }

    #[test]
    fn tail_fit_exact_power_law() {
        let spec = power_spectrum(2000, 2.0);
        let fit = tail_coefficient(&spec, 2, (20, 400)).unwrap();
        assert!((fit.coefficient - 1.0).abs() < 1e-12);
        assert!((fit.exponent + 0.5).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn tail_fit_oscillation_robust() {
        // μ_n = (n+1)^{-1/2}(1 + (-1)^n/√(n+1)): median stays near 1
        let vals: Vec<f64> = (0..4000)
            .map(|n| {
                let np = (n + 1) as f64;
                np.powf(-0.5) * (1.0 + if n % 2 == 0 { 1.0 } else { -1.0 } / np.sqrt())
            })
            .collect();
        let spec = SingularSpectrum::from_values(vals, "osc");
        let fit = tail_coefficient(&spec, 2, (50, 800)).unwrap();
        assert!((fit.coefficient - 1.0).abs() < 0.05, "{}", fit.coefficient);
    }

    #[test]
    fn tail_fit_window_validation() {
        let spec = power_spectrum(100, 2.0);
        assert!(tail_coefficient(&spec, 2, (5, 50)).is_err()); // starts too early
        assert!(tail_coefficient(&spec, 2, (20, 30)).is_err()); // too short
        assert!(tail_coefficient(&spec, 2, (20, 500)).is_err()); // past the end
    }

    #[test]
    fn tail_fit_ignores_prepended_large_values() {
        let spec = power_spectrum(3000, 2.0);
        let mut vals = vec![50.0, 40.0, 30.0, 20.0, 10.0];
        vals.extend_from_slice(&spec.values);
        let bumped = SingularSpectrum::from_values(vals, "bumped");
        let f0 = tail_coefficient(&spec, 2, (100, 900)).unwrap();
        let f1 = tail_coefficient(&bumped, 2, (100, 900)).unwrap();
        assert!(
            (f0.coefficient - f1.coefficient).abs() <= f0.residual + f1.residual + 1e-9,
            "{} vs {}",
            f0.coefficient,
            f1.coefficient
        );
    }

    #[test]
    fn unitary_invariance_of_singular_values() {
        let n = 24;
        let mut rng = seeded_rng(17);
        let a = Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        // unitary via QR of a random matrix (Gram-Schmidt)
        let mut q: Vec<Vec<Complex64>> = Vec::new();
        for _ in 0..n {
            let mut v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            for prev in &q {
                let dot: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (pi, vi) in prev.iter().zip(v.iter_mut()) {
                    *vi -= dot * pi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            q.push(v);
        }
        let qm = Array2::from_shape_fn((n, n), |(i, j)| q[j][i]);
        let rotated = linalg::matmul(&qm, &a).unwrap();
        let s1 = linalg::singular_values(&a).unwrap();
        let s2 = linalg::singular_values(&rotated).unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn mu_of_product_bounded_by_norms() {
        // μ(UAV) ≤ ‖U‖ μ(A) ‖V‖ checked through the top singular value on random triples
        let mut rng = seeded_rng(29);
        for _ in 0..5 {
            let n = 16;
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                Array2::from_shape_fn((n, n), |_| {
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                })
            };
            let u = mk(&mut rng);
            let a = mk(&mut rng);
            let v = mk(&mut rng);
            let uav = linalg::matmul(&linalg::matmul(&u, &a).unwrap(), &v).unwrap();
            let su = linalg::singular_values(&u).unwrap();
            let sa = linalg::singular_values(&a).unwrap();
            let sv = linalg::singular_values(&v).unwrap();
            let suav = linalg::singular_values(&uav).unwrap();
            for k in 0..n {
                assert!(suav[k] <= su[0] * sa[k] * sv[0] * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn direct_sum_of_two_copies() {
        let s = power_spectrum(4000, 2.0);
        let rep = direct_sum_coefficient(&[&s, &s], 2.0, (50, 800)).unwrap();
        assert!(
            (rep.merged_coefficient - 2f64.sqrt()).abs() < 0.02,
            "{}",
            rep.merged_coefficient
        );
        assert!(rep.relative_error < 0.02);
        // single block is its own coefficient
        let one = direct_sum_coefficient(&[&s], 2.0, (50, 800)).unwrap();
        assert!((one.merged_coefficient - 1.0).abs() < 1e-10);
        // block with zero coefficient contributes nothing
        let trace_class = SingularSpectrum::from_values(
            (0..4000).map(|k| ((k + 1) as f64).powf(-2.0)).collect(),
            "fast",
        );
        let with_zero = direct_sum_coefficient(&[&s, &trace_class], 2.0, (50, 800)).unwrap();
        assert!(
            (with_zero.merged_coefficient - 1.0).abs() < 0.03,
            "{}",
            with_zero.merged_coefficient
        );
    }

    #[test]
    fn finite_rank_stability_reports() {
        let base = power_spectrum(5000, 2.0);
        // V = 0
        let zero = SingularSpectrum::from_values(vec![], "zero");
        let rep = finite_rank_stability(&base, &zero, 2, (60, 1000)).unwrap();
        assert!(rep.pass);
        assert!(rep.difference < 1e-14);
        // rank-5 spike with norm 10 × base
        let spike = SingularSpectrum::from_values(vec![10.0; 5], "spike");
        let rep = finite_rank_stability(&base, &spike, 2, (60, 1000)).unwrap();
        assert!(rep.pass, "difference {} tol {}", rep.difference, rep.tolerance);
        // fast-decaying perturbation (separable-part proxy)
        let fast = SingularSpectrum::from_values(
            (0..5000).map(|k| 0.5 * ((k + 1) as f64).powf(-1.5)).collect(),
            "fast",
        );
        let rep = finite_rank_stability(&base, &fast, 2, (60, 1000)).unwrap();
        assert!(rep.pass, "difference {} tol {}", rep.difference, rep.tolerance);
    }

    #[test]
    fn convergence_transfer_synthetic() {
        // T_k = truncations of a synthetic diagonal operator with coefficient 1
        let target = power_spectrum(6000, 2.0);
        let mut stages = Vec::new();
        for &keep in &[300usize, 1000, 3000] {
            let mut vals = target.values.clone();
            for v in vals.iter_mut().skip(keep) {
                *v = 0.0;
            }
            let tn = SingularSpectrum::from_values(vals, format!("T_{keep}"));
            let fit = tail_coefficient(&tn, 2, (30, 250)).unwrap();
            // difference spectrum: the dropped tail
            let diff = SingularSpectrum::from_values(
                target.values.iter().skip(keep).copied().collect(),
                "diff",
            );
            let delta = diff
                .values
                .iter()
                .enumerate()
                .map(|(n, &mu)| ((n + 1) as f64).sqrt() * mu)
                .fold(0.0, f64::max);
            stages.push(ConvergenceStage {
                coefficient: fit.coefficient,
                delta,
            });
        }
        let rep = convergence_transfer(stages).unwrap();
        assert!(rep.deltas_decreasing);
        assert!((rep.limit_estimate - 1.0).abs() < 0.05, "{}", rep.limit_estimate);
        // T_k = T for all k: delta exactly zero
        let fit = tail_coefficient(&target, 2, (30, 250)).unwrap();
        let rep2 = convergence_transfer(vec![
            ConvergenceStage { coefficient: fit.coefficient, delta: 0.0 },
            ConvergenceStage { coefficient: fit.coefficient, delta: 0.0 },
        ])
        .unwrap();
        assert!(rep2.deltas_decreasing);
        assert!((rep2.limit_estimate - fit.coefficient).abs() < 1e-15);
    }

    #[test]
    fn csv_format() {
        let spec = SingularSpectrum::from_values(vec![2.0, 1.0], "x");
        let csv = spec.to_csv(2);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,mu,scaled");
        assert!(lines.next().unwrap().starts_with("0,2"));
    }
}
