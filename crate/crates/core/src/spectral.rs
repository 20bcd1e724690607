//! Roots of `det H_N(λ) = 0`, Gershgorin localisation, classification of
//! constant systems, and reconstruction of Floquet-form solutions.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hill::{assemble, sigma_min, sigma_min_and_nullvector, HillMatrix, LambdaGrid};
use crate::history::HistoryFunction;
use crate::integrator::{simulate_system, Trajectory};
use crate::system::{principal_arg, principal_power, principal_root, SystemSpec};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEDUP_RADIUS: f64 = 1e-6;
const GRID_POINTS: usize = 101;
const MAX_SEEDS: usize = 256;
const NM_MAX_ITER: u64 = 500;
const NEWTON_MAX_ITER: usize = 40;
const BOUNDARY_TOL: f64 = 1e-10;

/// Balls `|λ - c_k| <= ρ_k` that contain every root of the truncated
/// problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GershgorinRegion {
    pub centers: Vec<Complex64>,
    pub radii: Vec<f64>,
}

impl GershgorinRegion {
    /// Distance to the nearest ball; `<= 0` inside.
    pub fn excess(&self, lambda: Complex64) -> f64 {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| (lambda - c).norm() - r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, lambda: Complex64, slack: f64) -> bool {
        self.excess(lambda) <= slack
    }

    /// Upper bound on `Re λ` over the region.
    pub fn max_real_part(&self) -> f64 {
        self.centers.iter().zip(&self.radii).map(|(c, r)| c.re + r).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per block row, the largest absolute row sum of everything except the
/// `-(λ + ikω)^α` shift, raised to `1/α`.
pub fn gershgorin(spec: &SystemSpec, order: usize) -> GershgorinRegion {
    let n = spec.dim();
    let no = order as i64;
    let alpha = spec.alpha();
    let mut centers = Vec::with_capacity(2 * order + 1);
    let mut radii = Vec::with_capacity(2 * order + 1);
    for k in -no..=no {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut sum = 0.0;
            for (j, jm) in spec.coeffs().iter() {
                if (k - j).abs() > no {
                    continue;
                }
                sum += jm.row(i).iter().map(|z| z.norm()).sum::<f64>();
            }
            worst = worst.max(sum);
        }
        centers.push(Complex64::new(0.0, -(k as f64) * spec.omega()));
        radii.push(worst.powf(1.0 / alpha));
    }
    GershgorinRegion { centers, radii }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloquetClass {
    /// `Re λ >= 0`: `e^{λt} p(t)` is a genuine solution.
    ValidFloquet,
    /// `Re λ < 0`: a root of the Hill determinant without a solution behind it.
    InvalidNegativeRe,
}

impl FloquetClass {
    pub fn of(lambda: Complex64) -> Self {
        if lambda.re >= 0.0 {
            Self::ValidFloquet
        } else {
            Self::InvalidNegativeRe
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ValidFloquet => "valid-floquet",
            Self::InvalidNegativeRe => "invalid-negative-re",
        }
    }
}

/// A root `λ` with its unit, phase-fixed null vector `p = (p_{-N}, …, p_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: Complex64,
    pub residual: f64,
    pub p: DVector<Complex64>,
    pub dim: usize,
    pub truncation: usize,
    pub classification: FloquetClass,
}

impl Eigenpair {
    /// Builds the pair from the null vector of `H_N(λ)`.
    pub fn from_hill(hm: &HillMatrix) -> Result<Self> {
        let (residual, p) = sigma_min_and_nullvector(hm)?;
        Ok(Self {
            lambda: hm.lambda(),
            residual,
            p,
            dim: hm.spec().dim(),
            truncation: hm.truncation(),
            classification: FloquetClass::of(hm.lambda()),
        })
    }

    /// `p_k` for `k ∈ [-N, N]`.
    pub fn harmonic(&self, k: i64) -> DVector<Complex64> {
        let off = (k + self.truncation as i64) as usize * self.dim;
        self.p.rows(off, self.dim).into_owned()
    }

    pub fn harmonics(&self) -> Vec<(i64, DVector<Complex64>)> {
        let no = self.truncation as i64;
        (-no..=no).map(|k| (k, self.harmonic(k))).collect()
    }
}

/// Closed search rectangle for `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchStrip {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SearchStrip {
    /// `Re λ ∈ [0, Gershgorin bound]`, `Im λ ∈ [-ω/2, ω/2]`.
    pub fn fundamental(spec: &SystemSpec, order: usize) -> Self {
        let re_max = gershgorin(spec, order).max_real_part().max(0.0);
        let half = 0.5 * spec.omega();
        Self { re: (0.0, re_max * (1.0 + 1e-9) + 1e-9), im: (-half, half) }
    }

    fn contains(&self, l: Complex64, slack: f64) -> bool {
        l.re >= self.re.0 - slack && l.re <= self.re.1 + slack && l.im >= self.im.0 - slack && l.im <= self.im.1 + slack
    }
}

struct SigmaCost<'a> {
    spec: &'a SystemSpec,
    order: usize,
}

impl CostFunction for SigmaCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(sigma_min(&assemble(self.spec, self.order, Complex64::new(p[0], p[1]))).unwrap_or(f64::INFINITY))
    }
}

/// Nelder-Mead on `σ_min(λ)` from a grid seed.
fn nelder_mead(spec: &SystemSpec, order: usize, seed: Complex64, scale: f64) -> Complex64 {
    let simplex = vec![
        vec![seed.re, seed.im],
        vec![seed.re + scale, seed.im],
        vec![seed.re, seed.im + scale],
    ];
    let solver = match NelderMead::new(simplex).with_sd_tolerance(1e-15) {
        Ok(s) => s,
        Err(_) => return seed,
    };
    let run = Executor::new(SigmaCost { spec, order }, solver).configure(|s| s.max_iters(NM_MAX_ITER)).run();
    match run {
        Ok(res) => res.state.best_param.as_ref().map_or(seed, |p| Complex64::new(p[0], p[1])),
        Err(_) => seed,
    }
}

/// Newton iteration on `u* H(λ) v` with `u, v` the singular vectors of the
/// smallest singular value at the current iterate.
fn newton_polish(spec: &SystemSpec, order: usize, start: Complex64, tol: f64) -> (Complex64, f64) {
    let n = spec.dim();
    let no = order as i64;
    let alpha = spec.alpha();
    let mut lambda = start;
    let mut best = (start, f64::INFINITY);
    for _ in 0..NEWTON_MAX_ITER {
        let hm = assemble(spec, order, lambda);
        let svd = match SVD::try_new_unordered(hm.matrix().clone(), true, true, 1e-15, 10_000) {
            Some(s) => s,
            None => break,
        };
        let (idx, sigma) = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, s)| if s < b.1 { (i, s) } else { b });
        if sigma < best.1 {
            best = (lambda, sigma);
        }
        if sigma < 1e-3 * tol {
            break;
        }
        let u = svd.u.as_ref().expect("requested").column(idx).into_owned();
        let v = svd.v_t.as_ref().expect("requested").row(idx).transpose().map(|z| z.conj());
        // H'(λ) = -α (λ + ikω)^{α-1} on block k
        let mut deriv = Complex64::new(0.0, 0.0);
        for k in -no..=no {
            let w = lambda + Complex64::new(0.0, k as f64 * spec.omega());
            if w.norm() == 0.0 {
                continue;
            }
            let d = -alpha * principal_power(w, alpha) / w;
            let off = ((k + no) as usize) * n;
            for i in 0..n {
                deriv += u[off + i].conj() * d * v[off + i];
            }
        }
        if deriv.norm() == 0.0 || !deriv.is_finite() {
            break;
        }
        let step = Complex64::new(sigma, 0.0) / deriv;
        lambda -= step;
        if step.norm() <= 1e-15 * lambda.norm().max(1.0) {
            let s = sigma_min(&assemble(spec, order, lambda)).unwrap_or(f64::INFINITY);
            if s < best.1 {
                best = (lambda, s);
            }
            break;
        }
    }
    best
}

/// Grid scan of `σ_min` over `strip`, then Nelder-Mead and Newton
/// refinement of every local minimum. Roots outside `strip` are dropped.
pub fn find_eigenvalues(spec: &SystemSpec, order: usize, strip: Option<SearchStrip>, tol: f64) -> Result<Vec<Eigenpair>> {
    let strip = strip.unwrap_or_else(|| SearchStrip::fundamental(spec, order));
    if !(strip.re.1 >= strip.re.0 && strip.im.1 >= strip.im.0) {
        return Err(Error::InvalidParameter("empty search strip".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let grid = LambdaGrid { re: (strip.re.0, strip.re.1, GRID_POINTS), im: (strip.im.0, strip.im.1, GRID_POINTS) };
    let points = grid.points();
    let sig: Vec<f64> = points
        .par_iter()
        .map(|&l| sigma_min(&assemble(spec, order, l)))
        .collect::<Result<Vec<_>>>()?;

    let m = GRID_POINTS;
    let at = |i: usize, j: usize| sig[j * m + i];
    let mut seeds: Vec<(f64, Complex64)> = Vec::new();
    for j in 0..m {
        for i in 0..m {
            let s = at(i, j);
            let mut is_min = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= m as i64 || jj >= m as i64 {
                        continue;
                    }
                    if at(ii as usize, jj as usize) < s {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push((s, points[j * m + i]));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(MAX_SEEDS);

    let h_re = (strip.re.1 - strip.re.0) / (m - 1) as f64;
    let h_im = (strip.im.1 - strip.im.0) / (m - 1) as f64;
    let scale = 0.1 * h_re.max(h_im).max(1e-6);
    let slack = 1e-9;
    let refined: Vec<(Complex64, f64)> = seeds
        .par_iter()
        .map(|&(_, seed)| {
            let nm = nelder_mead(spec, order, seed, scale);
            newton_polish(spec, order, nm, tol)
        })
        .filter(|(l, s)| *s < tol && strip.contains(*l, slack))
        .collect();

    let mut roots = refined;
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut unique: Vec<(Complex64, f64)> = Vec::new();
    for (l, s) in roots {
        match unique.iter_mut().find(|(u, _)| (u - l).norm() < DEDUP_RADIUS) {
            Some(existing) => {
                if s < existing.1 {
                    *existing = (l, s);
                }
            }
            None => unique.push((l, s)),
        }
    }
    // a strip one period high sees each group on both edges; keep the top copy
    let omega = spec.omega();
    if strip.im.1 - strip.im.0 >= omega * (1.0 - 1e-12) {
        let shift = Complex64::new(0.0, omega);
        let tops: Vec<Complex64> = unique.iter().map(|(l, _)| *l).collect();
        unique.retain(|(l, _)| {
            let on_bottom = (l.im - strip.im.0).abs() < DEDUP_RADIUS;
            !(on_bottom && tops.iter().any(|u| (u - (l + shift)).norm() < DEDUP_RADIUS))
        });
    }
    unique.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    unique.iter().map(|(l, _)| Eigenpair::from_hill(&assemble(spec, order, *l))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LtiCase {
    /// `|arg μ| < απ/2`: exponential solution with `Re s > 0`.
    A,
    /// `απ/2 < |arg μ| <= απ`: `s` exists with `Re s < 0`, no solution.
    B,
    /// `|arg μ| > απ`: no preimage.
    C,
    /// `|arg μ|` within `1e-10` of `απ/2`; not classified.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtiEntry {
    pub mu: Complex64,
    pub arg: f64,
    pub case: LtiCase,
    pub s: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtiClassification {
    pub alpha: f64,
    pub entries: Vec<LtiEntry>,
}

/// Classifies every eigenvalue `μ` of `A` for `D^α x = A x` by where the
/// root of `s^α = μ` falls.
pub fn classify_lti(a: &DMatrix<f64>, alpha: f64) -> Result<LtiClassification> {
    crate::system::FractionalOrder::new(alpha)?;
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!("A must be square and non-empty, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("A has non-finite entries".into()));
    }
    let mut mus: Vec<Complex64> = a.clone().complex_eigenvalues().iter().copied().collect();
    mus.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let half = 0.5 * alpha * PI;
    let entries = mus
        .into_iter()
        .map(|mu| {
            let arg = principal_arg(mu);
            let s = principal_root(mu, alpha);
            let case = if (arg.abs() - half).abs() < BOUNDARY_TOL {
                LtiCase::Boundary
            } else if arg.abs() < half {
                LtiCase::A
            } else if s.is_some() {
                LtiCase::B
            } else {
                LtiCase::C
            };
            LtiEntry { mu, arg, case, s }
        })
        .collect();
    Ok(LtiClassification { alpha, entries })
}

/// `Re y(t_j)` with `y(t) = e^{λt} Σ_k p_k e^{ikωt}`, plus the largest
/// discarded imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetReconstruction {
    pub trajectory: Trajectory,
    pub imag_residue: f64,
}

pub fn floquet_value(ep: &Eigenpair, omega: f64, t: f64) -> DVector<Complex64> {
    let mut acc = DVector::<Complex64>::zeros(ep.dim);
    for (k, pk) in ep.harmonics() {
        acc += pk * Complex64::from_polar(1.0, k as f64 * omega * t);
    }
    acc * (ep.lambda * t).exp()
}

pub fn reconstruct_floquet(ep: &Eigenpair, spec: &SystemSpec, times: &[f64]) -> Result<FloquetReconstruction> {
    if ep.classification == FloquetClass::InvalidNegativeRe || ep.lambda.re < 0.0 {
        return Err(Error::InvalidClassification(ep.lambda.re));
    }
    if ep.dim != spec.dim() {
        return Err(Error::DimensionMismatch(format!("eigenpair has dimension {}, system {}", ep.dim, spec.dim())));
    }
    let mut values = Vec::with_capacity(times.len());
    let mut imag: f64 = 0.0;
    for &t in times {
        let y = floquet_value(ep, spec.omega(), t);
        imag = imag.max(y.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        values.push(y.map(|z| z.re));
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    Ok(FloquetReconstruction {
        trajectory: Trajectory { times: times.to_vec(), values, scheme: "floquet".into(), dt },
        imag_residue: imag,
    })
}

/// Simulation from the Floquet form as history on `(-∞, 0]` next to the
/// reconstruction on the same grid: `(y_sim, y_Hill)`.
pub fn floquet_comparison(ep: &Eigenpair, spec: &SystemSpec, t_end: f64, dt: f64) -> Result<(Trajectory, Trajectory)> {
    if ep.lambda.re < 0.0 {
        return Err(Error::InvalidClassification(ep.lambda.re));
    }
    if !(ep.p.norm() > 0.0) {
        return Err(Error::InvalidParameter("eigenvector must be nonzero".into()));
    }
    let history = HistoryFunction::floquet(ep.lambda, spec.omega(), ep.harmonics(), 0.0)?;
    let sim = simulate_system(spec, &history, t_end, dt)?;
    let hill = reconstruct_floquet(ep, spec, &sim.times)?.trajectory;
    Ok((sim, hill))
}

/// `max_j ‖y_sim(t_j) - y_Hill(t_j)‖ / max(1, ‖y_Hill(t_j)‖)`.
pub fn max_relative_error(sim: &Trajectory, hill: &Trajectory) -> f64 {
    sim.values
        .iter()
        .zip(&hill.values)
        .map(|(s, h)| (s - h).norm() / h.norm().max(1.0))
        .fold(0.0, f64::max)
}

pub fn verify_floquet(ep: &Eigenpair, spec: &SystemSpec, t_end: f64, dt: f64) -> Result<f64> {
    let (sim, hill) = floquet_comparison(ep, spec, t_end, dt)?;
    Ok(max_relative_error(&sim, &hill))
}

/// Eigenpair for a user-supplied `λ` (e.g. a known exact root).
pub fn eigenpair_at(spec: &SystemSpec, order: usize, lambda: Complex64) -> Result<Eigenpair> {
    Eigenpair::from_hill(&assemble(spec, order, lambda))
}
