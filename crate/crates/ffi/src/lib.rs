//! C ABI for the parabolic Airy library.
//!
//! Every call returns an [`AfStatus`]; results go through out-pointers. After a
//! failure, [`af_last_error_message`] describes it (per thread). Settings live
//! behind the opaque [`AfConfig`] handle.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use parabolic_airy::airy::{airy_ai, f_gue};
use parabolic_airy::kernels::PointConfig;
use parabolic_airy::pipeline::{joint_cdf, Method};
use parabolic_airy::{Error, Settings};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Points not strictly increasing in time, mismatched lengths, non-finite input.
    InvalidConfig = 3,
    /// Refinement difference above the configured tolerance.
    NotConverged = 4,
    /// Non-finite values or a singular matrix.
    Numeric = 5,
    /// An internal panic was caught at the boundary.
    Internal = 6,
}

/// Pipeline selector for [`af_joint_cdf`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfMethod {
    ExtAiry = 0,
    ContourK = 1,
    BMinusA = 2,
    LiuSum = 3,
}

impl From<AfMethod> for Method {
    fn from(m: AfMethod) -> Self {
        match m {
            AfMethod::ExtAiry => Method::ExtAiry,
            AfMethod::ContourK => Method::ContourK,
            AfMethod::BMinusA => Method::BMinusA,
            AfMethod::LiuSum => Method::LiuSum,
        }
    }
}

/// Opaque quadrature settings.
pub struct AfConfig {
    settings: Settings,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AfStatus {
    match e {
        Error::NotConverged { .. } => AfStatus::NotConverged,
        Error::NonFinite { .. } | Error::Singular { .. } => AfStatus::Numeric,
        Error::NonIncreasingAlpha | Error::InvalidConfig(_) | Error::IndexOutOfRange { .. } => AfStatus::InvalidConfig,
        _ => AfStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into [`AfStatus::Internal`].
fn guard<F: FnOnce() -> Result<(), (AfStatus, String)>>(f: F) -> AfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AfStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AfStatus::Internal
        }
    }
}

fn lib<T>(r: parabolic_airy::Result<T>) -> Result<T, (AfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AfStatus, String) {
    (AfStatus::NullPointer, format!("{what} is null"))
}

/// A new handle with default settings. Free it with [`af_config_free`].
#[no_mangle]
pub extern "C" fn af_config_new() -> *mut AfConfig {
    Box::into_raw(Box::new(AfConfig { settings: Settings::default() }))
}

/// Releases a handle from [`af_config_new`]. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn af_config_free(cfg: *mut AfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies `edit` to a copy of the settings and keeps it only if it validates.
unsafe fn update(cfg: *mut AfConfig, edit: impl FnOnce(&mut Settings)) -> AfStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let mut s = cfg.settings;
        edit(&mut s);
        lib(s.validate())?;
        cfg.settings = s;
        Ok(())
    })
}

/// Gauss–Legendre nodes per contour panel.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_config_set_nodes(cfg: *mut AfConfig, nodes: usize) -> AfStatus {
    update(cfg, |s| s.nodes = nodes)
}

/// Minimal arc-length truncation of contour rays.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_config_set_truncation(cfg: *mut AfConfig, truncation: f64) -> AfStatus {
    update(cfg, |s| s.truncation = truncation)
}

/// Right end of the half-line in the real-side determinants.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_config_set_lambda_max(cfg: *mut AfConfig, lambda_max: f64) -> AfStatus {
    update(cfg, |s| s.lambda_max = lambda_max)
}

/// Radius of the circle carrying the auxiliary `z` integrals, in `(0, 1)`.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_config_set_z_radius(cfg: *mut AfConfig, z_radius: f64) -> AfStatus {
    update(cfg, |s| s.z_radius = z_radius)
}

/// Refinement tolerance.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_config_set_tol(cfg: *mut AfConfig, tol: f64) -> AfStatus {
    update(cfg, |s| s.tol = tol)
}

/// `P(A(alpha[i]) <= beta[i] for all i)` for `m` points.
///
/// `cfg` may be null for default settings. `out_error` may be null.
///
/// # Safety
/// `alpha` and `beta` must point to `m` doubles; `cfg` must be null or live;
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn af_joint_cdf(
    cfg: *const AfConfig,
    alpha: *const f64,
    beta: *const f64,
    m: usize,
    method: AfMethod,
    out_value: *mut f64,
    out_error: *mut f64,
) -> AfStatus {
    guard(|| {
        if alpha.is_null() || beta.is_null() {
            return Err(null("alpha or beta"));
        }
        if out_value.is_null() {
            return Err(null("out_value"));
        }
        let settings = cfg.as_ref().map(|c| c.settings).unwrap_or_default();
        let a = std::slice::from_raw_parts(alpha, m).to_vec();
        let b = std::slice::from_raw_parts(beta, m).to_vec();
        let points = lib(PointConfig::new(a, b))?;
        let v = lib(joint_cdf(&points, method.into(), &settings))?;
        *out_value = v.value;
        if !out_error.is_null() {
            *out_error = v.error_estimate;
        }
        Ok(())
    })
}

/// The Airy function `Ai(x)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn af_airy_ai(x: f64, out: *mut f64) -> AfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !x.is_finite() {
            return Err((AfStatus::InvalidArgument, format!("x must be finite, got {x}")));
        }
        *out = airy_ai(x);
        Ok(())
    })
}

/// The GUE Tracy–Widom distribution function.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn af_f_gue(s: f64, out: *mut f64) -> AfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(f_gue(s))?;
        Ok(())
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn af_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn af_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
