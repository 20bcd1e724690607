//! Matrix Mittag-Leffler function for small diagonalizable real matrices.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use super::mittag_leffler::{mittag_leffler, MLParams};
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e8;

/// `E_{α,β}(A·scalar)` computed as `V diag(E_{α,β}(μ_i·scalar)) V^{-1}`.
///
/// Eigenvectors are taken from the numerical null space of `A − μI`, one
/// basis per cluster of repeated eigenvalues; a cluster whose null space is
/// smaller than its multiplicity means a Jordan block and is rejected, as is
/// an eigenvector matrix with condition number above `1e8`.
pub fn ml_matrix(params: MLParams, a: &DMatrix<f64>, scalar: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", n, a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) || !scalar.is_finite() {
        return Err(Error::InvalidParameter("non-finite matrix entry or scalar".into()));
    }
    let (v, mu) = eigendecomposition(a)?;
    let cond = condition_number(&v);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::NonDiagonalizable(cond));
    }
    let mut d = DVector::<Complex64>::zeros(n);
    for (i, m) in mu.iter().enumerate() {
        d[i] = mittag_leffler(params, *m * scalar)?;
    }
    let v_inv = v.clone().try_inverse().ok_or(Error::NonDiagonalizable(f64::INFINITY))?;
    let mut vd = v;
    for j in 0..n {
        let dj = d[j];
        vd.column_mut(j).iter_mut().for_each(|x| *x *= dj);
    }
    let full = vd * v_inv;
    let scale = full.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let imag = full.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 * scale {
        log::debug!("ml_matrix: discarding imaginary residue {imag:.3e}");
    }
    Ok(full.map(|z| z.re))
}

/// Eigenvector matrix and eigenvalues of a real matrix.
pub(crate) fn eigendecomposition(a: &DMatrix<f64>) -> Result<(DMatrix<Complex64>, Vec<Complex64>)> {
    let n = a.nrows();
    let raw: Vec<Complex64> = a.clone().complex_eigenvalues().iter().copied().collect();
    let scale = a.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let cluster_tol = 1e-8 * scale;

    // group numerically repeated eigenvalues
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for m in raw {
        match clusters.iter_mut().find(|(c, _)| (*c - m).norm() <= cluster_tol) {
            Some((c, k)) => {
                *c = (*c * *k as f64 + m) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((m, 1)),
        }
    }

    let ac = a.map(|x| Complex64::new(x, 0.0));
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    let mut mu = Vec::with_capacity(n);
    let mut col = 0;
    for (m, mult) in clusters {
        let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * m;
        let svd = SVD::new(shifted, false, true);
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let sv = &svd.singular_values;
        let null_tol = 1e-7 * scale;
        let null_dim = sv.iter().filter(|&&s| s <= null_tol).count();
        if null_dim < mult {
            return Err(Error::NonDiagonalizable(f64::INFINITY));
        }
        for k in 0..mult {
            let row = n - 1 - k;
            for i in 0..n {
                v[(i, col)] = v_t[(row, i)].conj();
            }
            mu.push(m);
            col += 1;
        }
    }
    Ok((v, mu))
}

pub(crate) fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
