//! C ABI over the frachill library.
//!
//! Every function returns a [`FrachillStatus`]. On failure the message is
//! kept per thread and can be copied out with [`frachill_last_error`].
//! Objects are opaque and must be released with the matching `_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frachill::hill::{assemble, log_abs_det};
use frachill::spectral::{find_eigenvalues, verify_floquet, Eigenpair, FloquetClass, SearchStrip};
use frachill::specfun::{mittag_leffler, MLParams};
use frachill::system::{parse_system, SystemSpec};
use frachill::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrachillStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad parameter, malformed JSON or schema violation.
    InvalidInput = 2,
    /// A numerical routine failed.
    Numerical = 3,
    Io = 4,
    IndexOutOfRange = 5,
    Panic = 6,
}

/// Periodic system matrix; create with `frachill_system_from_json` or
/// `frachill_system_scalar_sinusoid`.
pub struct FrachillSystem {
    spec: SystemSpec,
}

/// Result set of `frachill_find_eigenvalues`.
pub struct FrachillEigenvalues {
    pairs: Vec<Eigenpair>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrachillEigenvalue {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
    /// 1 when Re >= 0, 0 otherwise.
    pub valid: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrachillStrip {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FrachillStatus {
    match e {
        Error::Schema(_)
        | Error::Json(_)
        | Error::SymmetryViolation(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidParameter(_)
        | Error::InvalidClassification(_)
        | Error::OutOfDomain { .. } => FrachillStatus::InvalidInput,
        Error::Io(_) => FrachillStatus::Io,
        _ => FrachillStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), (FrachillStatus, String)>>(f: F) -> FrachillStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FrachillStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FrachillStatus::Panic
        }
    }
}

fn lib<T>(r: frachill::Result<T>) -> Result<T, (FrachillStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (FrachillStatus, String) {
    (FrachillStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FrachillStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FrachillStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn frachill_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated) and returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn frachill_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// E_{alpha,beta}(re + i im).
#[no_mangle]
pub unsafe extern "C" fn frachill_mittag_leffler(
    alpha: f64,
    beta: f64,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> FrachillStatus {
    guard(|| {
        let (o_re, o_im) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let v = lib(MLParams::new(alpha, beta).and_then(|p| mittag_leffler(p, Complex64::new(re, im))))?;
        *o_re = v.re;
        *o_im = v.im;
        Ok(())
    })
}

/// Parses a system document (UTF-8 JSON).
#[no_mangle]
pub unsafe extern "C" fn frachill_system_from_json(json: *const c_char, out_sys: *mut *mut FrachillSystem) -> FrachillStatus {
    guard(|| {
        let slot = out(out_sys, "out_sys")?;
        *slot = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (FrachillStatus::InvalidInput, "json is not valid UTF-8".to_string()))?;
        let spec = lib(parse_system(text))?;
        *slot = Box::into_raw(Box::new(FrachillSystem { spec }));
        Ok(())
    })
}

/// Scalar system J(t) = a + b sin(omega t) of order alpha.
#[no_mangle]
pub unsafe extern "C" fn frachill_system_scalar_sinusoid(
    alpha: f64,
    omega: f64,
    a: f64,
    b: f64,
    out_sys: *mut *mut FrachillSystem,
) -> FrachillStatus {
    guard(|| {
        let slot = out(out_sys, "out_sys")?;
        *slot = ptr::null_mut();
        let spec = lib(SystemSpec::scalar_sinusoid(alpha, omega, a, b))?;
        *slot = Box::into_raw(Box::new(FrachillSystem { spec }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frachill_system_dim(sys: *const FrachillSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.spec.dim())
}

#[no_mangle]
pub unsafe extern "C" fn frachill_system_free(sys: *mut FrachillSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// log|det H_N(lambda)| and the smallest singular value.
#[no_mangle]
pub unsafe extern "C" fn frachill_hill_log_abs_det(
    sys: *const FrachillSystem,
    truncation: usize,
    re: f64,
    im: f64,
    out_log_abs_det: *mut f64,
    out_sigma_min: *mut f64,
) -> FrachillStatus {
    guard(|| {
        let s = get(sys, "sys")?;
        let (o_det, o_sig) = (out(out_log_abs_det, "out_log_abs_det")?, out(out_sigma_min, "out_sigma_min")?);
        let ev = lib(log_abs_det(&assemble(&s.spec, truncation, Complex64::new(re, im))))?;
        *o_det = ev.log_abs_det;
        *o_sig = ev.sigma_min;
        Ok(())
    })
}

/// Roots of the Hill determinant. `strip` may be null for the default
/// fundamental strip.
#[no_mangle]
pub unsafe extern "C" fn frachill_find_eigenvalues(
    sys: *const FrachillSystem,
    truncation: usize,
    tol: f64,
    strip: *const FrachillStrip,
    out_eigs: *mut *mut FrachillEigenvalues,
) -> FrachillStatus {
    guard(|| {
        let slot = out(out_eigs, "out_eigs")?;
        *slot = ptr::null_mut();
        let s = get(sys, "sys")?;
        let strip = strip.as_ref().map(|st| SearchStrip { re: (st.re_min, st.re_max), im: (st.im_min, st.im_max) });
        let pairs = lib(find_eigenvalues(&s.spec, truncation, strip, tol))?;
        *slot = Box::into_raw(Box::new(FrachillEigenvalues { pairs }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frachill_eigenvalues_len(eigs: *const FrachillEigenvalues) -> usize {
    eigs.as_ref().map_or(0, |e| e.pairs.len())
}

#[no_mangle]
pub unsafe extern "C" fn frachill_eigenvalues_get(
    eigs: *const FrachillEigenvalues,
    index: usize,
    out_value: *mut FrachillEigenvalue,
) -> FrachillStatus {
    guard(|| {
        let e = get(eigs, "eigs")?;
        let o = out(out_value, "out_value")?;
        let ep = e.pairs.get(index).ok_or_else(|| {
            (FrachillStatus::IndexOutOfRange, format!("index {index} out of range for {} eigenvalues", e.pairs.len()))
        })?;
        *o = FrachillEigenvalue {
            re: ep.lambda.re,
            im: ep.lambda.im,
            residual: ep.residual,
            valid: i32::from(ep.classification == FloquetClass::ValidFloquet),
        };
        Ok(())
    })
}

/// Maximum relative error between the Floquet form of eigenpair `index` and
/// direct simulation over [0, t_end] with step dt.
#[no_mangle]
pub unsafe extern "C" fn frachill_eigenvalues_verify(
    eigs: *const FrachillEigenvalues,
    index: usize,
    sys: *const FrachillSystem,
    t_end: f64,
    dt: f64,
    out_max_rel_err: *mut f64,
) -> FrachillStatus {
    guard(|| {
        let e = get(eigs, "eigs")?;
        let s = get(sys, "sys")?;
        let o = out(out_max_rel_err, "out_max_rel_err")?;
        let ep = e
            .pairs
            .get(index)
            .ok_or_else(|| (FrachillStatus::IndexOutOfRange, format!("index {index} out of range")))?;
        *o = lib(verify_floquet(ep, &s.spec, t_end, dt))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frachill_eigenvalues_free(eigs: *mut FrachillEigenvalues) {
    if !eigs.is_null() {
        drop(Box::from_raw(eigs));
    }
}
