//! Thin wrapper around the dense decomposition backend (faer).
//!
//! Everything crosses this boundary as `ndarray::Array2<Complex64>`; faer's
//! `c64` is the same type, so only the column-major copy costs anything.

use crate::{Error, Result};
use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64;

/// Pin the backend's parallelism. `0` means "all available cores".
/// Called once by binaries/tests; reductions are deterministic per setting.
pub fn set_threads(n: usize) {
    let par = match n {
        1 => faer::Par::Seq,
        0 => faer::Par::rayon(0),
        k => faer::Par::rayon(k),
    };
    faer::set_global_parallelism(par);
}

fn to_faer(a: &Array2<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular values of a dense complex matrix, nonincreasing.
pub fn singular_values(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let m = to_faer(a);
    m.singular_values()
        .map_err(|e| Error::Decomposition(format!("svd failed: {e:?}")))
}

/// Eigendecomposition of a Hermitian matrix: (eigenvalues ascending, eigenvectors as columns).
pub fn hermitian_eigen(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let m = to_faer(a);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("eigendecomposition failed: {e:?}")))?;
    let n = a.nrows();
    let s = evd.S();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let u = evd.U();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
    Ok((values, vectors))
}

/// Eigenvalues only (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let m = to_faer(a);
    let vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("eigenvalues failed: {e:?}")))?;
    Ok(vals)
}

/// Dense complex matrix product through the backend (ndarray's generic `dot`
/// is a naive triple loop, far too slow at these sizes).
pub fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "matmul {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let fa = to_faer(a);
    let fb = to_faer(b);
    let fc = &fa * &fb;
    Ok(Array2::from_shape_fn((a.nrows(), b.ncols()), |(i, j)| {
        fc[(i, j)]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_diagonal() {
        let mut a = Array2::zeros((3, 3));
        a[(0, 0)] = Complex64::new(0.5, 0.0);
        a[(1, 1)] = Complex64::new(-2.0, 0.0);
        a[(2, 2)] = Complex64::new(0.0, 1.0);
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-14);
        assert!((s[1] - 1.0).abs() < 1e-14);
        assert!((s[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let n = 8;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let z = Complex64::new((i * 3 + j) as f64 / 7.0, (i as f64 - j as f64) / 5.0);
                a[(i, j)] = z;
            }
        }
        let h = {
            let at = a.t().mapv(|z| z.conj());
            (&a + &at) * Complex64::new(0.5, 0.0)
        };
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        // reconstruct
        let mut rec: Array2<Complex64> = Array2::zeros((n, n));
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    rec[(i, j)] += vecs[(i, k)] * Complex64::new(vals[k], 0.0) * vecs[(j, k)].conj();
                }
            }
        }
        let defect = (&rec - &h).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-12, "defect {defect:.2e}");
    }
}
