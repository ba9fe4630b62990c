//! C interface to the terascope coverage engine.
//!
//! Parameters live behind an opaque [`TsParams`] handle created with
//! [`ts_params_new_default`] and released with [`ts_params_free`]. Every
//! fallible call returns a [`TsStatus`] and writes its result through an out
//! pointer; on failure [`ts_last_error`] describes the error on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use terascope::config::ConfigParams;
use terascope::sim::estimate_coverage;
use terascope::{coverage::coverage, lambert_w0, BlockageCoupling, Error, Mode, Simulator, SystemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Argument outside the mathematical domain of the operation.
    Domain = 3,
    /// No association radius exists for the parameters.
    InfeasibleGeometry = 4,
    UnknownKey = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsMode {
    Full = 0,
    InterferenceOnly = 1,
    BlockageOnly = 2,
    DominantOnly = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsCoupling {
    Independent = 0,
    Shared = 1,
}

/// Closed-form coverage at one link distance.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TsCoverage {
    pub p_c: f64,
    pub p_cl: f64,
    pub p_l: f64,
    /// Mean number of dominant interferers; infinite when SNR-infeasible.
    pub lambda: f64,
    /// NaN when no dominant region exists.
    pub dominant_radius: f64,
    pub snr_infeasible: bool,
    pub outside_association: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TsEstimate {
    pub value: f64,
    pub half_width_95: f64,
    pub n_trials: u64,
    pub seed: u64,
}

/// Opaque parameter set, in configuration units (dB for powers and gains).
pub struct TsParams {
    config: ConfigParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::Domain { .. } => TsStatus::Domain,
        Error::InfeasibleGeometry(_) => TsStatus::InfeasibleGeometry,
        Error::ConfigKey { .. } => TsStatus::UnknownKey,
        _ => TsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics for [`ts_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (TsStatus, String)>) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic)".into());
            TsStatus::Internal
        }
    }
}

fn lift(e: Error) -> (TsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TsStatus, String) {
    (TsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a>(p: *const TsParams) -> Result<&'a TsParams, (TsStatus, String)> {
    // SAFETY: the caller passes a pointer from `ts_params_new_default` that
    // has not been freed, or null.
    unsafe { p.as_ref() }.ok_or_else(|| null("params"))
}

unsafe fn system(p: *const TsParams) -> Result<SystemParams, (TsStatus, String)> {
    unsafe { handle(p) }?.config.to_system_params().map_err(lift)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (TsStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: non-null and, by contract, valid for writes of `T`.
    unsafe { out.write(value) };
    Ok(())
}

/// New parameter set holding the reference values. Free with
/// [`ts_params_free`].
#[no_mangle]
pub extern "C" fn ts_params_new_default() -> *mut TsParams {
    Box::into_raw(Box::new(TsParams { config: ConfigParams::default() }))
}

/// Releases a parameter set. Null is ignored.
///
/// # Safety
/// `params` must come from [`ts_params_new_default`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ts_params_free(params: *mut TsParams) {
    if !params.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(params) });
    }
}

unsafe fn key_str<'a>(key: *const c_char) -> Result<&'a str, (TsStatus, String)> {
    if key.is_null() {
        return Err(null("key"));
    }
    // SAFETY: non-null, nul-terminated by contract.
    unsafe { CStr::from_ptr(key) }
        .to_str()
        .map_err(|_| (TsStatus::InvalidArgument, "key is not UTF-8".into()))
}

/// Sets a parameter by its config name (`h_A`, `tau_dB`, `lambda_B`, …).
/// Consistency is checked when the parameters are used.
///
/// # Safety
/// `params` must be a live handle and `key` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ts_params_set(params: *mut TsParams, key: *const c_char, value: f64) -> TsStatus {
    guard(|| {
        // SAFETY: see the function contract.
        let p = unsafe { params.as_mut() }.ok_or_else(|| null("params"))?;
        let key = unsafe { key_str(key) }?;
        if p.config.set(key, value) {
            Ok(())
        } else {
            Err((TsStatus::UnknownKey, format!("unknown parameter `{key}`")))
        }
    })
}

/// Reads a parameter by its config name.
///
/// # Safety
/// `params` must be a live handle, `key` nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_params_get(params: *const TsParams, key: *const c_char, out: *mut f64) -> TsStatus {
    guard(|| {
        let p = unsafe { handle(params) }?;
        let key = unsafe { key_str(key) }?;
        let v = p
            .config
            .get(key)
            .ok_or_else(|| (TsStatus::UnknownKey, format!("unknown parameter `{key}`")))?;
        unsafe { write(out, v) }
    })
}

/// Link-budget constant `P_T G_A G_U c²/(4πf)²` in W·m².
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_rho(params: *const TsParams, out: *mut f64) -> TsStatus {
    guard(|| {
        let p = unsafe { system(params) }?;
        unsafe { write(out, p.rho()) }
    })
}

/// Received LOS power (W) at horizontal distance `x` (m).
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_received_power(params: *const TsParams, x: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        if x.is_nan() || x < 0.0 {
            return Err((TsStatus::Domain, format!("distance {x} must be non-negative")));
        }
        let p = unsafe { system(params) }?;
        unsafe { write(out, p.received_power(x)) }
    })
}

/// Largest horizontal distance at which the SNR still meets the threshold.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_max_association_radius(params: *const TsParams, out: *mut f64) -> TsStatus {
    guard(|| {
        let p = unsafe { system(params) }?;
        let r = p.max_association_radius().map_err(lift)?;
        unsafe { write(out, r) }
    })
}

/// Closed-form coverage at link distance `x0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_coverage(params: *const TsParams, x0: f64, out: *mut TsCoverage) -> TsStatus {
    guard(|| {
        let p = unsafe { system(params) }?;
        let r = coverage(&p, x0).map_err(lift)?;
        let c = TsCoverage {
            p_c: r.p_c,
            p_cl: r.p_cl,
            p_l: r.p_l,
            lambda: r.lambda,
            dominant_radius: r.dominant_radius.unwrap_or(f64::NAN),
            snr_infeasible: r.snr_infeasible,
            outside_association: r.outside_association,
        };
        unsafe { write(out, c) }
    })
}

/// Monte Carlo coverage estimate over `n_trials` trials from `seed`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_estimate_coverage(
    params: *const TsParams,
    x0: f64,
    n_trials: u64,
    mode: TsMode,
    coupling: TsCoupling,
    seed: u64,
    out: *mut TsEstimate,
) -> TsStatus {
    guard(|| {
        if !(x0 >= 0.0 && x0.is_finite()) {
            return Err((TsStatus::Domain, format!("link distance {x0} must be finite and non-negative")));
        }
        let p = unsafe { system(params) }?;
        let mode = match mode {
            TsMode::Full => Mode::Full,
            TsMode::InterferenceOnly => Mode::InterferenceOnly,
            TsMode::BlockageOnly => Mode::BlockageOnly,
            TsMode::DominantOnly => Mode::DominantOnly,
        };
        let e = match coupling {
            TsCoupling::Independent => estimate_coverage(&p, x0, n_trials, mode, seed).map_err(lift)?,
            TsCoupling::Shared => Simulator::new(p)
                .map_err(lift)?
                .with_coupling(BlockageCoupling::Shared)
                .estimate(x0, n_trials, mode, seed),
        };
        let e = TsEstimate { value: e.value, half_width_95: e.half_width_95, n_trials: e.n_trials, seed: e.seed };
        unsafe { write(out, e) }
    })
}

/// Principal branch of the Lambert W function for `z ≥ 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_lambert_w0(z: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        let w = lambert_w0(z).map_err(lift)?;
        unsafe { write(out, w) }
    })
}

/// Why the most recent fallible call on this thread failed, or null if it
/// succeeded. Valid until the next such call from the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
