//! Linear time-periodic fractional systems `D^α y = J(t) y` with
//! `J(t) = Σ_k J_k e^{ikωt}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Fractional order `α ∈ (0, 1]`; `α = 1` is the classical case.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("fractional order must lie in (0, 1], got {alpha}")));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Fourier coefficients of a real periodic matrix, stored for every
/// `k ∈ [-K, K]` that is nonzero. `J_{-k} = conj(J_k)` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    dim: usize,
    harmonics: BTreeMap<i64, DMatrix<Complex64>>,
}

impl FourierCoefficients {
    /// Builds the coefficient set from the `k >= 0` harmonics. `J_0` must be
    /// present and real.
    pub fn from_nonnegative(dim: usize, entries: Vec<(i64, DMatrix<Complex64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("system dimension must be positive".into()));
        }
        let mut harmonics = BTreeMap::new();
        for (k, m) in entries {
            if k < 0 {
                return Err(Error::Schema(format!("harmonic k = {k} is negative; supply k >= 0 only")));
            }
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "harmonic k = {k} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Schema(format!("harmonic k = {k} has non-finite entries")));
            }
            if harmonics.insert(k, m).is_some() {
                return Err(Error::Schema(format!("harmonic k = {k} given twice")));
            }
        }
        let j0 = harmonics.get_mut(&0).ok_or_else(|| Error::Schema("harmonic k = 0 is required".into()))?;
        let scale = j0.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if j0.iter().any(|z| z.im.abs() > SYMMETRY_TOL * scale) {
            return Err(Error::SymmetryViolation("J_0 must be real".into()));
        }
        j0.iter_mut().for_each(|z| z.im = 0.0);
        let positive: Vec<(i64, DMatrix<Complex64>)> =
            harmonics.iter().filter(|(k, _)| **k > 0).map(|(k, m)| (*k, m.clone())).collect();
        for (k, m) in positive {
            harmonics.insert(-k, m.map(|z| z.conj()));
        }
        Ok(Self { dim, harmonics })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest retained harmonic `K`.
    pub fn max_harmonic(&self) -> i64 {
        self.harmonics.keys().next_back().copied().unwrap_or(0)
    }

    /// `J_k`, or `None` when the harmonic is absent (zero).
    pub fn get(&self, k: i64) -> Option<&DMatrix<Complex64>> {
        self.harmonics.get(&k)
    }

    /// All stored harmonics, negative ones included, in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &DMatrix<Complex64>)> {
        self.harmonics.iter().map(|(k, m)| (*k, m))
    }
}

/// A validated LTP system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    order: FractionalOrder,
    omega: f64,
    period: f64,
    coeffs: FourierCoefficients,
}

impl SystemSpec {
    pub fn new(alpha: f64, omega: f64, coeffs: FourierCoefficients) -> Result<Self> {
        let order = FractionalOrder::new(alpha)?;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Ok(Self { order, omega, period: 2.0 * PI / omega, coeffs })
    }

    /// Scalar system `J(t) = a + b sin(ωt)`.
    pub fn scalar_sinusoid(alpha: f64, omega: f64, a: f64, b: f64) -> Result<Self> {
        let c = |re: f64, im: f64| DMatrix::from_element(1, 1, Complex64::new(re, im));
        let mut entries = vec![(0, c(a, 0.0))];
        if b != 0.0 {
            entries.push((1, c(0.0, -0.5 * b)));
        }
        Self::new(alpha, omega, FourierCoefficients::from_nonnegative(1, entries)?)
    }

    /// Mathieu-type system `J(t) = [[0, 1], [c + d sin(ωt), 0]]`.
    pub fn mathieu(alpha: f64, omega: f64, c: f64, d: f64) -> Result<Self> {
        let z = Complex64::new(0.0, 0.0);
        let j0 = DMatrix::from_row_slice(2, 2, &[z, Complex64::new(1.0, 0.0), Complex64::new(c, 0.0), z]);
        let mut entries = vec![(0, j0)];
        if d != 0.0 {
            entries.push((1, DMatrix::from_row_slice(2, 2, &[z, z, Complex64::new(0.0, -0.5 * d), z])));
        }
        Self::new(alpha, omega, FourierCoefficients::from_nonnegative(2, entries)?)
    }

    /// Time-invariant system `J(t) = J_0`.
    pub fn constant(alpha: f64, omega: f64, j0: &DMatrix<f64>) -> Result<Self> {
        let n = j0.nrows();
        if j0.ncols() != n {
            return Err(Error::DimensionMismatch("J_0 must be square".into()));
        }
        let entries = vec![(0, j0.map(|x| Complex64::new(x, 0.0)))];
        Self::new(alpha, omega, FourierCoefficients::from_nonnegative(n, entries)?)
    }

    pub fn alpha(&self) -> f64 {
        self.order.value()
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn coeffs(&self) -> &FourierCoefficients {
        &self.coeffs
    }

    /// Same system with a different fractional order.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.omega, self.coeffs.clone())
    }

    /// `J(t)`, imaginary residue dropped.
    pub fn eval_j(&self, t: f64) -> DMatrix<f64> {
        let n = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (k, m) in self.coeffs.iter() {
            let phase = Complex64::from_polar(1.0, self.omega * k as f64 * t);
            acc += m * phase;
        }
        acc.map(|z| z.re)
    }

    /// Largest imaginary part of `Σ J_k e^{ikωt}` before it is dropped.
    pub fn eval_j_imag_residue(&self, t: f64) -> f64 {
        let n = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (k, m) in self.coeffs.iter() {
            acc += m * Complex64::from_polar(1.0, self.omega * k as f64 * t);
        }
        acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn to_document(&self) -> SystemDocument {
        SystemDocument {
            alpha: self.alpha(),
            omega: self.omega,
            dim: self.dim(),
            harmonics: self
                .coeffs
                .iter()
                .filter(|(k, _)| *k >= 0)
                .map(|(k, m)| HarmonicDocument {
                    k,
                    re: rows(m, |z| z.re),
                    im: Some(rows(m, |z| z.im)),
                })
                .collect(),
        }
    }
}

fn rows(m: &DMatrix<Complex64>, f: impl Fn(&Complex64) -> f64) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
}

/// Argument in `(-π, π]`, with both zeros of the imaginary part on the
/// negative real axis mapped to `π`.
pub fn principal_arg(w: Complex64) -> f64 {
    if w.im == 0.0 && w.re < 0.0 {
        PI
    } else {
        w.im.atan2(w.re)
    }
}

/// Principal power `|w|^α e^{iα arg w}`, with `0^α = 0`.
pub fn principal_power(w: Complex64, alpha: f64) -> Complex64 {
    if alpha == 1.0 {
        return w;
    }
    let r = w.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(r.powf(alpha), alpha * principal_arg(w))
}

/// Preimage `s` with `s^α = μ` under the principal power, if one exists
/// (`|arg μ| <= απ`).
pub fn principal_root(mu: Complex64, alpha: f64) -> Option<Complex64> {
    let r = mu.norm();
    if r == 0.0 {
        return Some(Complex64::new(0.0, 0.0));
    }
    let arg = principal_arg(mu);
    if arg.abs() > alpha * PI {
        return None;
    }
    Some(Complex64::from_polar(r.powf(1.0 / alpha), arg / alpha))
}

/// JSON form of a system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub alpha: f64,
    pub omega: f64,
    pub dim: usize,
    pub harmonics: Vec<HarmonicDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicDocument {
    pub k: i64,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

fn matrix_from_rows(dim: usize, k: i64, rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!("harmonic k = {k}: `{what}` is not {dim}x{dim}")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

impl SystemDocument {
    pub fn into_spec(self) -> Result<SystemSpec> {
        let dim = self.dim;
        if dim == 0 {
            return Err(Error::DimensionMismatch("dim must be positive".into()));
        }
        if self.harmonics.is_empty() {
            return Err(Error::Schema("harmonics list is empty; k = 0 is required".into()));
        }
        let mut nonneg = Vec::new();
        let mut negative = Vec::new();
        for h in &self.harmonics {
            let re = matrix_from_rows(dim, h.k, &h.re, "re")?;
            let im = match &h.im {
                Some(im) => matrix_from_rows(dim, h.k, im, "im")?,
                None => DMatrix::zeros(dim, dim),
            };
            let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
            if h.k >= 0 {
                nonneg.push((h.k, m));
            } else {
                negative.push((h.k, m));
            }
        }
        let coeffs = FourierCoefficients::from_nonnegative(dim, nonneg)?;
        // negative harmonics are redundant; they must agree with conjugation
        for (k, m) in negative {
            let expected = coeffs.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(dim, dim));
            let scale = expected.iter().map(|z| z.norm()).fold(1.0, f64::max);
            if (m - expected).iter().any(|z| z.norm() > SYMMETRY_TOL * scale) {
                return Err(Error::SymmetryViolation(format!(
                    "harmonic k = {k} is not the conjugate of harmonic k = {}",
                    -k
                )));
            }
        }
        SystemSpec::new(self.alpha, self.omega, coeffs)
    }
}

/// Parses a system document from JSON text.
pub fn parse_system(json: &str) -> Result<SystemSpec> {
    let doc: SystemDocument = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    doc.into_spec()
}
