//! Truncated fractional Hill matrix `H_N(λ)` and the linear algebra used to
//! locate its singular points.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::system::{principal_power, SystemSpec};

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

/// `H_N(λ)` for one `λ`. Block indices run over `-N..=N`.
#[derive(Debug, Clone)]
pub struct HillMatrix {
    spec: SystemSpec,
    order: usize,
    lambda: Complex64,
    matrix: DMatrix<Complex64>,
}

impl HillMatrix {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    /// Truncation order `N`.
    pub fn truncation(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row/column offset of block `r ∈ [-N, N]`.
    pub fn block_offset(&self, r: i64) -> usize {
        (r + self.order as i64) as usize * self.spec.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillEvaluation {
    pub lambda: Complex64,
    /// `-∞` when a pivot vanishes exactly.
    pub log_abs_det: f64,
    pub det_phase: Complex64,
    pub sigma_min: f64,
}

pub fn assemble(spec: &SystemSpec, order: usize, lambda: Complex64) -> HillMatrix {
    let n = spec.dim();
    let blocks = 2 * order + 1;
    let size = n * blocks;
    let alpha = spec.alpha();
    let omega = spec.omega();
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    let no = order as i64;
    for r in -no..=no {
        for (k, jk) in spec.coeffs().iter() {
            let c = r - k;
            if c < -no || c > no {
                continue;
            }
            let (ro, co) = (((r + no) as usize) * n, ((c + no) as usize) * n);
            m.view_mut((ro, co), (n, n)).copy_from(jk);
        }
        let shift = principal_power(lambda + Complex64::new(0.0, r as f64 * omega), alpha);
        let ro = ((r + no) as usize) * n;
        for i in 0..n {
            m[(ro + i, ro + i)] -= shift;
        }
    }
    HillMatrix { spec: spec.clone(), order, lambda, matrix: m }
}

/// `log|det H|` and `det H / |det H|` from an LU factorisation with partial
/// pivoting, plus the smallest singular value.
pub fn log_abs_det(hm: &HillMatrix) -> Result<HillEvaluation> {
    let lu = hm.matrix.clone().lu();
    let u = lu.u();
    let mut log_abs = 0.0;
    let mut phase: Complex64 = lu.p().determinant();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        let r = d.norm();
        if r == 0.0 {
            log_abs = f64::NEG_INFINITY;
            phase = Complex64::new(1.0, 0.0);
            break;
        }
        log_abs += r.ln();
        phase *= d / r;
    }
    if log_abs.is_finite() {
        phase /= phase.norm();
    }
    Ok(HillEvaluation { lambda: hm.lambda, log_abs_det: log_abs, det_phase: phase, sigma_min: sigma_min(hm)? })
}

/// Smallest singular value only.
pub fn sigma_min(hm: &HillMatrix) -> Result<f64> {
    let svd = SVD::try_new_unordered(hm.matrix.clone(), false, false, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::IterationFailure("singular value decomposition did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Smallest singular value with its right singular vector, normalised to
/// unit length with the largest-magnitude entry real and positive.
pub fn sigma_min_and_nullvector(hm: &HillMatrix) -> Result<(f64, DVector<Complex64>)> {
    let svd = SVD::try_new_unordered(hm.matrix.clone(), false, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::IterationFailure("singular value decomposition did not converge".into()))?;
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best });
    let v_t = svd.v_t.as_ref().expect("requested");
    let v = v_t.row(idx).transpose().map(|z| z.conj());
    Ok((sigma, fix_phase(v)))
}

/// Unit norm, first largest-magnitude entry rotated onto the positive reals.
pub fn fix_phase(v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    if norm == 0.0 {
        return v;
    }
    let mut best = 0;
    let mut best_mag = 0.0;
    for (i, z) in v.iter().enumerate() {
        // ties broken towards the lower index, up to rounding
        if z.norm() > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = z.norm();
        }
    }
    let rot = v[best].conj() / (best_mag * norm);
    let mut out = v * rot;
    out[best] = Complex64::new(out[best].norm(), 0.0);
    out
}

/// Uniform grid of `λ` values, row-major with the real part fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub re: (f64, f64, usize),
    pub im: (f64, f64, usize),
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let axis = |(a, b, n): (f64, f64, usize)| -> Vec<f64> {
            if n <= 1 {
                vec![a]
            } else {
                (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
            }
        };
        let (re, im) = (axis(self.re), axis(self.im));
        im.iter().flat_map(|&y| re.iter().map(move |&x| Complex64::new(x, y))).collect()
    }
}

/// Evaluates `log_abs_det` on every grid point in parallel; output order
/// follows `grid.points()`.
pub fn determinant_grid(spec: &SystemSpec, order: usize, grid: &LambdaGrid) -> Result<Vec<HillEvaluation>> {
    grid.points().par_iter().map(|&l| log_abs_det(&assemble(spec, order, l))).collect()
}
