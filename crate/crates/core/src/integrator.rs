//! Fractional Adams-Bashforth-Moulton (PECE) integration of Caputo problems
//! `D^α x = f(t, x)`, and Liouville-Weyl problems through their forced
//! Caputo form `D^α x = f(t, x) - F x0(t)`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::{ForcingEvaluator, HistoryFunction};
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::specfun::{gamma, mittag_leffler_real, MLParams};
use crate::system::{FractionalOrder, SystemSpec};

pub const SCHEME_PECE: &str = "fracpece";

/// Right-hand side `f(t, x)`.
pub type Rhs<'a> = dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Sync + 'a;

pub struct IvpProblem<'a> {
    pub alpha: FractionalOrder,
    pub rhs: &'a Rhs<'a>,
    pub x0: DVector<f64>,
    /// Subtracted from the right-hand side when present.
    pub forcing: Option<&'a ForcingEvaluator>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

/// Solution samples on the uniform grid `t0 + j·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<DVector<f64>>,
    pub scheme: String,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn last(&self) -> Option<(f64, &DVector<f64>)> {
        self.times.last().map(|t| (*t, self.values.last().expect("same length")))
    }
}

/// Number of steps covering `[t0, t_end]`; exact multiples are recognised
/// up to rounding.
fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite t0, t_end and dt > 0, got dt = {dt}")));
    }
    let span = t_end - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }
    if dt > span * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("dt = {dt} exceeds the interval length {span}")));
    }
    let ratio = span / dt;
    let m = if (ratio - ratio.round()).abs() <= 1e-9 * ratio { ratio.round() } else { ratio.ceil() };
    Ok(m as usize)
}

/// PECE with one correction per step and the full memory sum.
pub fn solve_caputo(p: &IvpProblem) -> Result<Trajectory> {
    let alpha = p.alpha.value();
    let m = step_count(p.t0, p.t_end, p.dt)?;
    let n = p.x0.len();
    if p.x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("initial value is not finite".into()));
    }
    if let Some(fe) = p.forcing {
        if fe.history().dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "history has dimension {}, state has {n}",
                fe.history().dim()
            )));
        }
    }
    let h = p.dt;
    let times: Vec<f64> = (0..=m).map(|j| p.t0 + j as f64 * h).collect();

    // forcing is state independent: evaluate once per node
    let forcing: Option<Vec<DVector<f64>>> = match p.forcing {
        Some(fe) => Some(times.par_iter().map(|&t| fe.forcing(t)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let f = |j: usize, t: f64, x: &DVector<f64>| -> Result<DVector<f64>> {
        let mut v = (p.rhs)(t, x);
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!("rhs returned {} components, expected {n}", v.len())));
        }
        if let Some(fv) = &forcing {
            v -= &fv[j];
        }
        Ok(v)
    };

    // weights depend on n - j only
    let ap1 = alpha + 1.0;
    let b: Vec<f64> = (0..=m).map(|k| ((k + 1) as f64).powf(alpha) - (k as f64).powf(alpha)).collect();
    let a: Vec<f64> = (0..=m)
        .map(|k| {
            let k = k as f64;
            (k + 2.0).powf(ap1) + k.powf(ap1) - 2.0 * (k + 1.0).powf(ap1)
        })
        .collect();
    let cp = h.powf(alpha) / gamma(alpha + 1.0)?;
    let cc = h.powf(alpha) / gamma(alpha + 2.0)?;

    let mut values = Vec::with_capacity(m + 1);
    values.push(p.x0.clone());
    // f values stored flat, row j = f(t_j, x_j)
    let mut fs: Vec<f64> = Vec::with_capacity((m + 1) * n);
    fs.extend(f(0, times[0], &p.x0)?.iter());

    let mut pred = vec![0.0; n];
    let mut corr = vec![0.0; n];
    for step in 0..m {
        // step computes x_{step+1}
        let nn = step as f64;
        pred.iter_mut().for_each(|x| *x = 0.0);
        corr.iter_mut().for_each(|x| *x = 0.0);
        let a0 = nn.powf(ap1) - (nn - alpha) * (nn + 1.0).powf(alpha);
        for j in 0..=step {
            let row = &fs[j * n..(j + 1) * n];
            let bw = b[step - j];
            let aw = if j == 0 { a0 } else { a[step - j] };
            for i in 0..n {
                pred[i] += bw * row[i];
                corr[i] += aw * row[i];
            }
        }
        let xp = DVector::from_iterator(n, (0..n).map(|i| p.x0[i] + cp * pred[i]));
        let t_next = times[step + 1];
        let fp = f(step + 1, t_next, &xp)?;
        let x_next = DVector::from_iterator(n, (0..n).map(|i| p.x0[i] + cc * (fp[i] + corr[i])));
        if x_next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { last_valid_time: times[step] });
        }
        let fx = f(step + 1, t_next, &x_next)?;
        if fx.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { last_valid_time: times[step] });
        }
        fs.extend(fx.iter());
        values.push(x_next);
    }
    Ok(Trajectory { times, values, scheme: SCHEME_PECE.to_string(), dt: h })
}

/// Liouville-Weyl problem `D^α x = f(t, x)` for `t >= t0`, `x = x0` before.
pub fn solve_liouville_weyl(
    alpha: f64,
    rhs: &Rhs,
    history: &HistoryFunction,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let order = FractionalOrder::new(alpha)?;
    let forcing = ForcingEvaluator::new(history.clone(), alpha)?;
    let t0 = history.t0();
    let problem = IvpProblem {
        alpha: order,
        rhs,
        x0: history.eval(t0)?,
        forcing: Some(&forcing),
        t0,
        t_end,
        dt,
    };
    solve_caputo(&problem)
}

/// Liouville-Weyl run of the LTP system `D^α y = J(t) y`.
pub fn simulate_system(spec: &SystemSpec, history: &HistoryFunction, t_end: f64, dt: f64) -> Result<Trajectory> {
    if history.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "history has dimension {}, system has {}",
            history.dim(),
            spec.dim()
        )));
    }
    let rhs = |t: f64, y: &DVector<f64>| spec.eval_j(t) * y;
    solve_liouville_weyl(spec.alpha(), &rhs, history, t_end, dt)
}

/// Scalar `D^α u = A u` (`A < 0`) through the variation-of-constants formula
/// `u(t) = E_α(A s^α) u0(t0) - ∫_0^s σ^{α-1} E_{α,α}(A σ^α) F u0(t - σ) dσ`,
/// `s = t - t0`. The substitution `v = σ^α` removes the kernel singularity.
pub fn voc_solution_scalar(a: f64, alpha: f64, history: &HistoryFunction, t: f64) -> Result<f64> {
    if !(a < 0.0) {
        return Err(Error::InvalidParameter(format!("A must be negative, got {a}")));
    }
    if history.dim() != 1 {
        return Err(Error::DimensionMismatch("variation of constants is scalar only".into()));
    }
    FractionalOrder::new(alpha)?;
    let t0 = history.t0();
    let s = t - t0;
    if !(s >= 0.0) {
        return Err(Error::OutOfDomain { t, t0 });
    }
    let u0 = history.eval(t0)?[0];
    if s == 0.0 {
        return Ok(u0);
    }
    let e1 = MLParams::new(alpha, 1.0)?;
    let ea = MLParams::new(alpha, alpha)?;
    let homogeneous = mittag_leffler_real(e1, a * s.powf(alpha))? * u0;
    if alpha == 1.0 {
        return Ok(homogeneous);
    }
    let fe = ForcingEvaluator::new(history.clone(), alpha)?;
    let vmax = s.powf(alpha);
    let integrand = |v: f64| -> f64 {
        let sigma = v.powf(1.0 / alpha);
        let tau = (t - sigma).max(t0);
        let ml = mittag_leffler_real(ea, a * v).unwrap_or(f64::NAN);
        let f = fe.forcing(tau).map(|x| x[0]).unwrap_or(f64::NAN);
        ml * f
    };
    // geometric breaks resolve the decay of E_{α,α}(Av) and the forcing's
    // boundary layer at v = vmax
    let mut breaks = vec![0.0];
    let mut x = 1.0f64.min(0.5 * vmax);
    while x < vmax {
        breaks.push(x);
        x *= 2.0;
    }
    let near_end: Vec<f64> = (1..=8).map(|k| vmax * (1.0 - 0.5f64.powi(k))).collect();
    breaks.extend(near_end);
    breaks.push(vmax);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let cfg = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-10, max_panels: 5000 };
    let integral = integrate_with_breaks(integrand, &breaks, &cfg)?.value / alpha;
    Ok(homogeneous - integral)
}
