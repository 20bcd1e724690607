//! Initial functions on `(-∞, t0]` and the forcing term
//! `F x0(t) = Γ(1-α)^{-1} ∫_{-∞}^{t0} (t-τ)^{-α} x0'(τ) dτ` they induce.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::specfun::{gamma, upper_incomplete_gamma_scaled, upper_incomplete_gamma_scaled_complex};
use crate::system::principal_power;

const DEFAULT_ETA: f64 = 1.0;
/// Histories whose increments near `t0` scale like `h^p` with `p` below this
/// are treated as cusps (unbounded derivative).
const CUSP_EXPONENT: f64 = 0.8;

/// The shapes of initial function supported.
#[derive(Debug, Clone, PartialEq)]
pub enum HistoryKind {
    /// `x(τ) = value`.
    Constant { value: DVector<f64> },
    /// `x(τ) = amplitude · sin(frequency·τ + phase)`. With a `window` `L` the
    /// sinusoid is only used on `[t0 - L, t0]` and continued constantly
    /// before that.
    TruncatedSinusoid { amplitude: DVector<f64>, frequency: f64, phase: f64, window: Option<f64> },
    /// `x(τ) = coeff · e^{rate·τ}`, `rate > 0`.
    ExpGrowth { rate: f64, coeff: DVector<f64> },
    /// `far_value` before `ramp_start`, then linear down to zero at `t0`.
    PiecewiseConstantRamp { far_value: DVector<f64>, ramp_start: f64 },
    /// `x(τ) = Re(e^{λτ} Σ_k p_k e^{ikωτ})`, `Re λ >= 0`.
    FloquetForm { lambda: Complex64, omega: f64, coeffs: Vec<(i64, DVector<Complex64>)> },
    /// Piecewise-linear interpolation of samples ending at `t0`; constant
    /// `tail` (equal to the first sample) before the grid.
    Sampled { times: Vec<f64>, values: Vec<DVector<f64>>, tail: DVector<f64> },
}

/// A validated initial function.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFunction {
    kind: HistoryKind,
    t0: f64,
    eta: f64,
}

/// Behaviour of the history as `τ → -∞`, which decides how the quadrature
/// route closes the infinite integral.
enum Tail {
    Constant { from: f64, value: DVector<f64> },
    Exponential { rate: f64, scale: f64 },
    Oscillatory,
}

fn check_vec(v: &DVector<f64>, what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::DimensionMismatch(format!("{what} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} has non-finite entries")));
    }
    Ok(())
}

impl HistoryFunction {
    pub fn new(kind: HistoryKind, t0: f64) -> Result<Self> {
        Self::with_eta(kind, t0, DEFAULT_ETA)
    }

    pub fn with_eta(kind: HistoryKind, t0: f64, eta: f64) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::InvalidParameter("t0 must be finite".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        match &kind {
            HistoryKind::Constant { value } => check_vec(value, "value")?,
            HistoryKind::TruncatedSinusoid { amplitude, frequency, phase, window } => {
                check_vec(amplitude, "amplitude")?;
                if !(*frequency > 0.0 && frequency.is_finite()) || !phase.is_finite() {
                    return Err(Error::InvalidParameter("sinusoid needs a positive frequency and finite phase".into()));
                }
                if let Some(l) = window {
                    if !(*l > 0.0 && l.is_finite()) {
                        return Err(Error::InvalidParameter(format!("window must be positive, got {l}")));
                    }
                }
            }
            HistoryKind::ExpGrowth { rate, coeff } => {
                check_vec(coeff, "coeff")?;
                if *rate < 0.0 {
                    return Err(Error::DivergentForcing(format!(
                        "x0 = c·exp({rate}·t) grows without bound as t → -∞; its forcing term does not exist"
                    )));
                }
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidParameter(format!("growth rate must be positive, got {rate}")));
                }
            }
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => {
                check_vec(far_value, "far_value")?;
                if !(*ramp_start < t0) {
                    return Err(Error::InvalidParameter(format!("ramp_start {ramp_start} must precede t0 = {t0}")));
                }
            }
            HistoryKind::FloquetForm { lambda, omega, coeffs } => {
                if !(lambda.re.is_finite() && lambda.im.is_finite()) {
                    return Err(Error::InvalidParameter("lambda must be finite".into()));
                }
                if lambda.re < 0.0 {
                    return Err(Error::DivergentForcing(format!(
                        "Floquet history with Re lambda = {} < 0 is unbounded as t → -∞",
                        lambda.re
                    )));
                }
                if !(*omega > 0.0 && omega.is_finite()) {
                    return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
                }
                let dim = coeffs.first().map(|(_, p)| p.len()).unwrap_or(0);
                if dim == 0 {
                    return Err(Error::DimensionMismatch("Floquet history needs at least one coefficient".into()));
                }
                let mut ks: Vec<i64> = coeffs.iter().map(|(k, _)| *k).collect();
                ks.sort_unstable();
                ks.dedup();
                if ks.len() != coeffs.len() {
                    return Err(Error::Schema("duplicate harmonic in Floquet history".into()));
                }
                for (k, p) in coeffs {
                    if p.len() != dim {
                        return Err(Error::DimensionMismatch(format!("coefficient k = {k} has wrong length")));
                    }
                    if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return Err(Error::InvalidParameter(format!("coefficient k = {k} is not finite")));
                    }
                }
            }
            HistoryKind::Sampled { times, values, tail } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::DimensionMismatch("sampled history needs >= 2 times and one value per time".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidParameter("sample times must be finite and strictly increasing".into()));
                }
                let last = times[times.len() - 1];
                if (last - t0).abs() > 1e-12 * t0.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!("last sample time {last} must equal t0 = {t0}")));
                }
                let dim = tail.len();
                check_vec(tail, "tail")?;
                for v in values {
                    if v.len() != dim {
                        return Err(Error::DimensionMismatch("sample vectors differ in length".into()));
                    }
                    check_vec(v, "sample")?;
                }
                let scale = tail.amax().max(1.0);
                if (tail - &values[0]).amax() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(
                        "tail value must equal the first sample so that x0 is continuous".into(),
                    ));
                }
            }
        }
        Ok(Self { kind, t0, eta })
    }

    pub fn constant(value: &[f64], t0: f64) -> Result<Self> {
        Self::new(HistoryKind::Constant { value: DVector::from_column_slice(value) }, t0)
    }

    /// Floquet-form history `Re(e^{λτ} Σ p_k e^{ikωτ})`.
    pub fn floquet(lambda: Complex64, omega: f64, coeffs: Vec<(i64, DVector<Complex64>)>, t0: f64) -> Result<Self> {
        Self::new(HistoryKind::FloquetForm { lambda, omega, coeffs }, t0)
    }

    pub fn kind(&self) -> &HistoryKind {
        &self.kind
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            HistoryKind::Constant { value } => value.len(),
            HistoryKind::TruncatedSinusoid { amplitude, .. } => amplitude.len(),
            HistoryKind::ExpGrowth { coeff, .. } => coeff.len(),
            HistoryKind::PiecewiseConstantRamp { far_value, .. } => far_value.len(),
            HistoryKind::FloquetForm { coeffs, .. } => coeffs[0].1.len(),
            HistoryKind::Sampled { tail, .. } => tail.len(),
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t > self.t0 || t.is_nan() {
            return Err(Error::OutOfDomain { t, t0: self.t0 });
        }
        Ok(())
    }

    /// `(c_j, μ_j)` with `x(τ) = Re Σ c_j e^{μ_j τ}` for the oscillatory kinds.
    fn exponential_terms(&self) -> Vec<(DVector<Complex64>, Complex64)> {
        match &self.kind {
            HistoryKind::TruncatedSinusoid { amplitude, frequency, phase, .. } => {
                let c = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, *phase);
                vec![(amplitude.map(|a| c * a), Complex64::new(0.0, *frequency))]
            }
            HistoryKind::FloquetForm { lambda, omega, coeffs } => coeffs
                .iter()
                .map(|(k, p)| (p.clone(), lambda + Complex64::new(0.0, *k as f64 * omega)))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn exp_sum(&self, t: f64, derivative: bool) -> DVector<f64> {
        let mut acc = DVector::<f64>::zeros(self.dim());
        for (c, mu) in self.exponential_terms() {
            let mut f = (mu * t).exp();
            if derivative {
                f *= mu;
            }
            acc += c.map(|z| (z * f).re);
        }
        acc
    }

    /// `x0(t)` for `t <= t0`.
    pub fn eval(&self, t: f64) -> Result<DVector<f64>> {
        self.check_domain(t)?;
        Ok(match &self.kind {
            HistoryKind::Constant { value } => value.clone(),
            HistoryKind::TruncatedSinusoid { window, .. } => {
                let t = window.map_or(t, |l| t.max(self.t0 - l));
                self.exp_sum(t, false)
            }
            HistoryKind::ExpGrowth { rate, coeff } => coeff * (rate * t).exp(),
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => {
                if t < *ramp_start {
                    far_value.clone()
                } else {
                    far_value * ((self.t0 - t) / (self.t0 - ramp_start))
                }
            }
            HistoryKind::FloquetForm { .. } => self.exp_sum(t, false),
            HistoryKind::Sampled { times, values, tail } => {
                if t <= times[0] {
                    return Ok(tail.clone());
                }
                let j = times.partition_point(|&s| s <= t).min(times.len() - 1);
                let (a, b) = (times[j - 1], times[j]);
                let w = (t - a) / (b - a);
                &values[j - 1] * (1.0 - w) + &values[j] * w
            }
        })
    }

    /// Points in `(-∞, t0)` where `x0'` jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            HistoryKind::TruncatedSinusoid { window: Some(l), .. } => vec![self.t0 - l],
            HistoryKind::PiecewiseConstantRamp { ramp_start, .. } => vec![*ramp_start],
            HistoryKind::Sampled { times, .. } => times[..times.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// `x0'(t)` for `t <= t0` (left derivative at `t0`). Sampled histories use
    /// a centred difference with step `1e-6·max(1, |t|)`.
    pub fn derivative(&self, t: f64) -> Result<DVector<f64>> {
        self.check_domain(t)?;
        if self.kinks().contains(&t) {
            return Err(Error::Kink(t));
        }
        Ok(match &self.kind {
            HistoryKind::Constant { value } => DVector::zeros(value.len()),
            HistoryKind::TruncatedSinusoid { window, .. } => {
                if window.is_some_and(|l| t < self.t0 - l) {
                    DVector::zeros(self.dim())
                } else {
                    self.exp_sum(t, true)
                }
            }
            HistoryKind::ExpGrowth { rate, coeff } => coeff * (rate * (rate * t).exp()),
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => {
                if t < *ramp_start {
                    DVector::zeros(far_value.len())
                } else {
                    far_value * (-1.0 / (self.t0 - ramp_start))
                }
            }
            HistoryKind::FloquetForm { .. } => self.exp_sum(t, true),
            HistoryKind::Sampled { .. } => {
                let h = 1e-6 * t.abs().max(1.0);
                // one-sided at t0
                if t + h > self.t0 {
                    (self.eval(t)? - self.eval(t - h)?) / h
                } else {
                    (self.eval(t + h)? - self.eval(t - h)?) / (2.0 * h)
                }
            }
        })
    }

    /// `sup_{τ <= t0} ‖x0(τ)‖` (Euclidean norm; an upper estimate for the
    /// Floquet kind).
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            HistoryKind::Constant { value } => value.norm(),
            HistoryKind::TruncatedSinusoid { amplitude, frequency, phase, window } => {
                let s = match window {
                    Some(l) => sup_abs_sin(*frequency, *phase, self.t0 - l, self.t0),
                    None => 1.0,
                };
                amplitude.norm() * s
            }
            HistoryKind::ExpGrowth { rate, coeff } => coeff.norm() * (rate * self.t0).exp(),
            HistoryKind::PiecewiseConstantRamp { far_value, .. } => far_value.norm(),
            HistoryKind::FloquetForm { lambda, coeffs, .. } => {
                (lambda.re * self.t0).exp() * coeffs.iter().map(|(_, p)| p.norm()).sum::<f64>()
            }
            HistoryKind::Sampled { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `sup_{[t0-η, t0]} ‖x0'‖` (an upper estimate for the Floquet kind).
    pub fn sup_derivative_near_t0(&self) -> f64 {
        let lo = self.t0 - self.eta;
        match &self.kind {
            HistoryKind::Constant { .. } => 0.0,
            HistoryKind::TruncatedSinusoid { amplitude, frequency, phase, window } => {
                let a = window.map_or(lo, |l| lo.max(self.t0 - l));
                amplitude.norm() * frequency * sup_abs_sin(*frequency, phase + 0.5 * PI, a, self.t0)
            }
            HistoryKind::ExpGrowth { rate, coeff } => coeff.norm() * rate * (rate * self.t0).exp(),
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => far_value.norm() / (self.t0 - ramp_start),
            HistoryKind::FloquetForm { lambda, omega, coeffs } => {
                (lambda.re * self.t0).exp()
                    * coeffs
                        .iter()
                        .map(|(k, p)| p.norm() * (lambda + Complex64::new(0.0, *k as f64 * omega)).norm())
                        .sum::<f64>()
            }
            HistoryKind::Sampled { times, values, .. } => times
                .windows(2)
                .zip(values.windows(2))
                .filter(|(w, _)| w[1] > lo)
                .map(|(w, v)| (&v[1] - &v[0]).norm() / (w[1] - w[0]))
                .fold(0.0, f64::max),
        }
    }

    fn tail(&self) -> Tail {
        match &self.kind {
            HistoryKind::Constant { value } => Tail::Constant { from: self.t0, value: value.clone() },
            HistoryKind::TruncatedSinusoid { window: Some(l), .. } => {
                let from = self.t0 - l;
                Tail::Constant { from, value: self.exp_sum(from, false) }
            }
            HistoryKind::TruncatedSinusoid { window: None, .. } => Tail::Oscillatory,
            HistoryKind::ExpGrowth { rate, coeff } => Tail::Exponential { rate: *rate, scale: coeff.norm() },
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => {
                Tail::Constant { from: *ramp_start, value: far_value.clone() }
            }
            HistoryKind::FloquetForm { lambda, coeffs, .. } => {
                let scale = coeffs.iter().map(|(_, p)| p.norm()).sum::<f64>();
                if lambda.re > 0.0 {
                    Tail::Exponential { rate: lambda.re, scale }
                } else if lambda.im == 0.0 && coeffs.iter().all(|(k, p)| *k == 0 || p.norm() == 0.0) {
                    Tail::Constant { from: self.t0, value: self.exp_sum(self.t0, false) }
                } else {
                    Tail::Oscillatory
                }
            }
            HistoryKind::Sampled { times, tail, .. } => Tail::Constant { from: times[0], value: tail.clone() },
        }
    }

    /// Least-squares exponent `p` in `‖x(t0) - x(t0 - h)‖ ~ h^p` over the
    /// samples nearest `t0`; `None` if they do not span a decade in `h`.
    fn sampled_increment_exponent(&self) -> Option<f64> {
        let HistoryKind::Sampled { times, values, .. } = &self.kind else {
            return None;
        };
        let last = values.len() - 1;
        let h_min = self.t0 - times[last - 1];
        let mut pts = Vec::new();
        for j in (0..last).rev() {
            let h = self.t0 - times[j];
            if h > 100.0 * h_min {
                break;
            }
            let d = (&values[last] - &values[j]).norm();
            if d > 0.0 {
                pts.push((h.ln(), d.ln()));
            }
        }
        let span = pts.last()?.0 - pts.first()?.0;
        if pts.len() < 3 || span < 10f64.ln() {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// `sup |sin(ν τ + φ)|` for `τ ∈ [a, b]`.
fn sup_abs_sin(nu: f64, phi: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = (nu * a + phi, nu * b + phi);
    if hi - lo >= PI {
        return 1.0;
    }
    // first peak π/2 + kπ at or after lo
    let k = ((lo - 0.5 * PI) / PI).ceil();
    if 0.5 * PI + k * PI <= hi {
        return 1.0;
    }
    lo.sin().abs().max(hi.sin().abs())
}

/// How [`ForcingEvaluator`] computes `F x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcingMethod {
    /// Closed forms per kind (exact up to special-function accuracy).
    #[default]
    Analytic,
    /// Generic quadrature of the defining integral; unavailable for histories
    /// that oscillate without decay as `τ → -∞`.
    Quadrature,
}

#[derive(Debug, Clone, Copy)]
pub struct ForcingConfig {
    pub method: ForcingMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self { method: ForcingMethod::Analytic, abs_tol: 1e-12, rel_tol: 1e-11, max_panels: 6000 }
    }
}

/// Evaluates `F x0` for one history and fractional order.
#[derive(Debug, Clone)]
pub struct ForcingEvaluator {
    history: HistoryFunction,
    alpha: f64,
    config: ForcingConfig,
}

impl ForcingEvaluator {
    pub fn new(history: HistoryFunction, alpha: f64) -> Result<Self> {
        Self::with_config(history, alpha, ForcingConfig::default())
    }

    pub fn with_config(history: HistoryFunction, alpha: f64, config: ForcingConfig) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if let Some(p) = history.sampled_increment_exponent() {
            if p < CUSP_EXPONENT {
                return Err(Error::SingularForcing(format!(
                    "increments near t0 scale like h^{p:.3}; x0' is unbounded at t0"
                )));
            }
        }
        Ok(Self { history, alpha, config })
    }

    pub fn history(&self) -> &HistoryFunction {
        &self.history
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn config(&self) -> &ForcingConfig {
        &self.config
    }

    /// `F x0(t)` for `t >= t0`.
    pub fn forcing(&self, t: f64) -> Result<DVector<f64>> {
        let t0 = self.history.t0;
        if !(t >= t0) {
            return Err(Error::OutOfDomain { t, t0 });
        }
        let n = self.history.dim();
        if self.alpha == 1.0 {
            return Ok(DVector::zeros(n));
        }
        match self.config.method {
            ForcingMethod::Analytic => self.analytic(t),
            ForcingMethod::Quadrature => self.by_quadrature(t),
        }
    }

    /// Constant `C` and `η` of the decay bound
    /// `‖F x0(t)‖ <= C (t - t0 + η)^{-α}`, with
    /// `C = Γ(1-α)^{-1} (2‖x0‖_∞ + η/(1-α) sup_{[t0-η,t0]} ‖x0'‖)`.
    pub fn bound_constant(&self) -> (f64, f64) {
        let a = self.alpha;
        let eta = self.history.eta;
        if a == 1.0 {
            return (0.0, eta);
        }
        let g = gamma(1.0 - a).expect("1 - alpha lies in (0, 1)");
        let c = (2.0 * self.history.sup_norm() + eta / (1.0 - a) * self.history.sup_derivative_near_t0()) / g;
        (c, eta)
    }

    fn analytic(&self, t: f64) -> Result<DVector<f64>> {
        let h = &self.history;
        let a = self.alpha;
        let t0 = h.t0;
        let d = t - t0;
        let g1 = gamma(1.0 - a)?;
        match &h.kind {
            HistoryKind::Constant { value } => Ok(DVector::zeros(value.len())),
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => {
                let l = t0 - ramp_start;
                let g2 = gamma(2.0 - a)?;
                let s = (d.powf(1.0 - a) - (t - ramp_start).powf(1.0 - a)) / (l * g2);
                Ok(far_value * s)
            }
            HistoryKind::ExpGrowth { rate, coeff } => {
                let scaled = upper_incomplete_gamma_scaled(1.0 - a, rate * d)?;
                Ok(coeff * (rate.powf(a) * (rate * t0).exp() * scaled / g1))
            }
            HistoryKind::TruncatedSinusoid { window, .. } => {
                let mut f = self.exp_sum_forcing(t, t0)?;
                if let Some(l) = window {
                    f -= self.exp_sum_forcing(t, t0 - l)?;
                }
                Ok(f)
            }
            HistoryKind::FloquetForm { .. } => self.exp_sum_forcing(t, t0),
            HistoryKind::Sampled { times, values, .. } => {
                let g2 = gamma(2.0 - a)?;
                let mut acc = DVector::zeros(h.dim());
                for (w, v) in times.windows(2).zip(values.windows(2)) {
                    let slope = (&v[1] - &v[0]) / (w[1] - w[0]);
                    let weight = (t - w[0]).powf(1.0 - a) - (t - w[1]).powf(1.0 - a);
                    acc += slope * weight;
                }
                Ok(acc / g2)
            }
        }
    }

    /// `Re Σ c μ^α e^{μ a} [e^{x} Γ(1-α, x)] / Γ(1-α)`, `x = μ (t - a)`: the
    /// forcing of `Re Σ c e^{μτ}` cut off at `τ = a`.
    fn exp_sum_forcing(&self, t: f64, cut: f64) -> Result<DVector<f64>> {
        let a = self.alpha;
        let g1 = gamma(1.0 - a)?;
        let mut acc = DVector::<f64>::zeros(self.history.dim());
        for (c, mu) in self.history.exponential_terms() {
            if mu.norm() == 0.0 {
                continue;
            }
            let x = mu * (t - cut);
            let scaled = upper_incomplete_gamma_scaled_complex(1.0 - a, x)?;
            let factor = principal_power(mu, a) * (mu * cut).exp() * scaled / g1;
            acc += c.map(|z| (z * factor).re);
        }
        Ok(acc)
    }

    /// Splits the integral at `t0 - η`: the part near `t0` is integrated with
    /// `σ = t0 - τ = v^{1/(1-α)}`, which removes the kernel singularity at
    /// `t = t0`; the remainder is integrated by parts so only `x0` itself is
    /// needed, and its infinite tail is closed exactly (constant tail) or
    /// truncated (exponentially decaying tail).
    fn by_quadrature(&self, t: f64) -> Result<DVector<f64>> {
        let h = &self.history;
        let a = self.alpha;
        let t0 = h.t0;
        let eta = h.eta;
        let d = t - t0;
        let n = h.dim();
        let cfg = QuadConfig { abs_tol: self.config.abs_tol, rel_tol: self.config.rel_tol, max_panels: self.config.max_panels };
        let kinks = h.kinks();

        // near part
        let p = 1.0 / (1.0 - a);
        let vmax = eta.powf(1.0 - a);
        let mut vbreaks = vec![0.0];
        let mut inner: Vec<f64> = kinks
            .iter()
            .filter(|&&k| k > t0 - eta && k < t0)
            .map(|&k| (t0 - k).powf(1.0 - a))
            .collect();
        inner.sort_by(f64::total_cmp);
        vbreaks.extend(inner);
        vbreaks.push(vmax);

        let tail = h.tail();
        let far_end = t0 - eta;
        let (far_lo, tail_term) = match &tail {
            Tail::Constant { from, value } => {
                if *from >= far_end {
                    (far_end, Some(value * (t - far_end).powf(-a)))
                } else {
                    (*from, Some(value * (t - from).powf(-a)))
                }
            }
            Tail::Exponential { rate, scale } => {
                // envelope scale·e^{rate τ} below 1e-16 of its value at t0 - η
                let drop = 16.0 * 10f64.ln() + (scale.max(1e-300) * (rate * far_end).exp()).max(1.0).ln();
                (far_end - drop / rate, None)
            }
            Tail::Oscillatory => {
                return Err(Error::Quadrature(
                    "history oscillates without decay as t → -∞; the quadrature route cannot close the tail".into(),
                ))
            }
        };
        let mut fbreaks = vec![far_lo];
        let len = far_end - far_lo;
        if len > 0.0 {
            let pieces = (len / 2.0).ceil().min(400.0) as usize;
            for i in 1..pieces {
                fbreaks.push(far_lo + len * i as f64 / pieces as f64);
            }
            fbreaks.extend(kinks.iter().copied().filter(|&k| k > far_lo && k < far_end));
            fbreaks.sort_by(f64::total_cmp);
            fbreaks.dedup();
        }
        fbreaks.push(far_end);

        let x_far = h.eval(far_end)?;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let near = integrate_with_breaks(
                |v: f64| {
                    let sigma = v.powf(p);
                    let tau = t0 - sigma;
                    let dx = h.derivative(tau).map(|g| g[i]).unwrap_or(f64::NAN);
                    p * v.powf(p - 1.0) * (d + sigma).powf(-a) * dx
                },
                &vbreaks,
                &cfg,
            )?
            .value;
            let far_integral = if len > 0.0 {
                integrate_with_breaks(
                    |tau: f64| (t - tau).powf(-a - 1.0) * h.eval(tau).map(|x| x[i]).unwrap_or(f64::NAN),
                    &fbreaks,
                    &cfg,
                )?
                .value
            } else {
                0.0
            };
            let closed = tail_term.as_ref().map_or(0.0, |v| v[i]);
            let far = (d + eta).powf(-a) * x_far[i] - a * far_integral - closed;
            out[i] = near + far;
        }
        Ok(out / gamma(1.0 - a)?)
    }
}

/// JSON forms of the history kinds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistoryDocument {
    Constant {
        value: Vec<f64>,
        #[serde(default)]
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    Sinusoid {
        amplitude: Vec<f64>,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<f64>,
        #[serde(default)]
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    ExpGrowth {
        rate: f64,
        coeff: Vec<f64>,
        #[serde(default)]
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    Ramp {
        far_value: Vec<f64>,
        ramp_start: f64,
        #[serde(default)]
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    Floquet {
        lambda: ComplexDocument,
        omega: f64,
        coeffs: Vec<VectorHarmonic>,
        #[serde(default)]
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
        tail: Vec<f64>,
        #[serde(default)]
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDocument {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorHarmonic {
    pub k: i64,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl HistoryDocument {
    pub fn into_history(self) -> Result<HistoryFunction> {
        let v = |x: Vec<f64>| DVector::from_vec(x);
        let (kind, t0, eta) = match self {
            HistoryDocument::Constant { value, t0, eta } => (HistoryKind::Constant { value: v(value) }, t0, eta),
            HistoryDocument::Sinusoid { amplitude, frequency, phase, window, t0, eta } => (
                HistoryKind::TruncatedSinusoid { amplitude: v(amplitude), frequency, phase, window },
                t0,
                eta,
            ),
            HistoryDocument::ExpGrowth { rate, coeff, t0, eta } => {
                (HistoryKind::ExpGrowth { rate, coeff: v(coeff) }, t0, eta)
            }
            HistoryDocument::Ramp { far_value, ramp_start, t0, eta } => {
                (HistoryKind::PiecewiseConstantRamp { far_value: v(far_value), ramp_start }, t0, eta)
            }
            HistoryDocument::Floquet { lambda, omega, coeffs, t0, eta } => {
                let mut cs = Vec::new();
                for h in coeffs {
                    let im = h.im.unwrap_or_else(|| vec![0.0; h.re.len()]);
                    if im.len() != h.re.len() {
                        return Err(Error::DimensionMismatch(format!("coefficient k = {}: re/im lengths differ", h.k)));
                    }
                    let p = DVector::from_iterator(h.re.len(), h.re.iter().zip(&im).map(|(r, i)| Complex64::new(*r, *i)));
                    cs.push((h.k, p));
                }
                (HistoryKind::FloquetForm { lambda: Complex64::new(lambda.re, lambda.im), omega, coeffs: cs }, t0, eta)
            }
            HistoryDocument::Sampled { times, values, tail, t0, eta } => (
                HistoryKind::Sampled { times, values: values.into_iter().map(v).collect(), tail: v(tail) },
                t0,
                eta,
            ),
        };
        HistoryFunction::with_eta(kind, t0, eta.unwrap_or(DEFAULT_ETA))
    }
}

impl HistoryFunction {
    pub fn to_document(&self) -> HistoryDocument {
        let v = |x: &DVector<f64>| x.iter().copied().collect::<Vec<_>>();
        let t0 = self.t0;
        let eta = Some(self.eta);
        match &self.kind {
            HistoryKind::Constant { value } => HistoryDocument::Constant { value: v(value), t0, eta },
            HistoryKind::TruncatedSinusoid { amplitude, frequency, phase, window } => HistoryDocument::Sinusoid {
                amplitude: v(amplitude),
                frequency: *frequency,
                phase: *phase,
                window: *window,
                t0,
                eta,
            },
            HistoryKind::ExpGrowth { rate, coeff } => HistoryDocument::ExpGrowth { rate: *rate, coeff: v(coeff), t0, eta },
            HistoryKind::PiecewiseConstantRamp { far_value, ramp_start } => {
                HistoryDocument::Ramp { far_value: v(far_value), ramp_start: *ramp_start, t0, eta }
            }
            HistoryKind::FloquetForm { lambda, omega, coeffs } => HistoryDocument::Floquet {
                lambda: ComplexDocument { re: lambda.re, im: lambda.im },
                omega: *omega,
                coeffs: coeffs
                    .iter()
                    .map(|(k, p)| VectorHarmonic {
                        k: *k,
                        re: p.iter().map(|z| z.re).collect(),
                        im: Some(p.iter().map(|z| z.im).collect()),
                    })
                    .collect(),
                t0,
                eta,
            },
            HistoryKind::Sampled { times, values, tail } => HistoryDocument::Sampled {
                times: times.clone(),
                values: values.iter().map(v).collect(),
                tail: v(tail),
                t0,
                eta,
            },
        }
    }
}

/// Parses a history document from JSON text.
pub fn parse_history(json: &str) -> Result<HistoryFunction> {
    let doc: HistoryDocument = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    doc.into_history()
}
