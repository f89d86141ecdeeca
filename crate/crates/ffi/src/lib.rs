//! C ABI over `spt-core`.
//!
//! Every entry point returns an [`SptStatus`]; on failure the message is kept per thread and can be
//! read back with [`spt_last_error`]. Panics are caught at the boundary and reported as
//! `SPT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spt_core::critical::{critical_line_dqr, critical_line_twophoton, critical_scan, Order, Ray, ScanOptions};
use spt_core::ed::{solve_lowest, HilbertSpec};
use spt_core::{grad_phi, minimize_global, phi, Beta, ModelSpec, ScanBudget, SptError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SptStatus {
    Ok = 0,
    InvalidArgument = 1,
    Validation = 2,
    NonConvergence = 3,
    Unsupported = 4,
    Domain = 5,
    DimensionCap = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque model handle.
pub struct SptModel {
    spec: ModelSpec,
}

/// Result of a critical scan. `t_c` is NaN when no transition was found;
/// `order` is 0 (none), 1 (first) or 2 (second).
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SptTransition {
    pub t_c: f64,
    pub order: i32,
    pub jump: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &SptError) -> SptStatus {
    match err {
        SptError::InvalidParams(_) | SptError::ArityMismatch { .. } | SptError::NonFinite(_) | SptError::Json(_) => SptStatus::InvalidArgument,
        SptError::Validation(_) => SptStatus::Validation,
        SptError::NonConvergence(_) => SptStatus::NonConvergence,
        SptError::Unsupported(_) => SptStatus::Unsupported,
        SptError::Domain(_) => SptStatus::Domain,
        SptError::DimensionCap { .. } => SptStatus::DimensionCap,
        SptError::Io(_) => SptStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), SptError>>(f: F) -> SptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SptStatus::Ok
        }
        Ok(Err(e)) => {
            let msg = match &e {
                SptError::Validation(v) => v.iter().map(|x| x.message.as_str()).collect::<Vec<_>>().join("; "),
                other => other.to_string(),
            };
            set_error(msg);
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside spt".into());
            SptStatus::Panic
        }
    }
}

fn null(what: &str) -> SptError {
    SptError::InvalidParams(format!("{what} is null"))
}

unsafe fn model_ref<'a>(m: *const SptModel) -> Result<&'a SptModel, SptError> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], SptError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("input array"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Parse a JSON model specification and validate it.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_model_from_json(json: *const c_char, out: *mut *mut SptModel) -> SptStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| SptError::InvalidParams("model JSON is not UTF-8".into()))?;
        let spec = ModelSpec::from_json(text)?;
        spec.ensure_valid()?;
        *out = Box::into_raw(Box::new(SptModel { spec }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`spt_model_from_json`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spt_model_free(model: *mut SptModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Natural order-vector length of the model; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_model_arity(model: *const SptModel) -> usize {
    model.as_ref().map_or(0, |m| m.spec.arity())
}

/// # Safety
/// `u` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_phi(model: *const SptModel, u: *const f64, len: usize, out: *mut f64) -> SptStatus {
    guard(|| {
        let m = model_ref(model)?;
        let u = slice(u, len)?;
        let v = phi(&m.spec, u)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Gradient of the potential, written to `out[0..len]`.
///
/// # Safety
/// `u` must hold `len` doubles and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spt_grad_phi(model: *const SptModel, u: *const f64, len: usize, out: *mut f64) -> SptStatus {
    guard(|| {
        let m = model_ref(model)?;
        let g = grad_phi(&m.spec, slice(u, len)?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&g);
        Ok(())
    })
}

/// Global minimum: first minimizer into `out_u[0..out_len]` (truncated or zero-padded to `out_len`),
/// its potential value and `u²`.
///
/// # Safety
/// `out_u` must have room for `out_len` doubles; `out_phi` and `out_u2` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn spt_minimize(model: *const SptModel, out_u: *mut f64, out_len: usize, out_phi: *mut f64, out_u2: *mut f64) -> SptStatus {
    guard(|| {
        let m = model_ref(model)?;
        let r = minimize_global(&m.spec, &ScanBudget::default())?;
        if out_len > 0 {
            if out_u.is_null() {
                return Err(null("out_u"));
            }
            let dst = std::slice::from_raw_parts_mut(out_u, out_len);
            dst.fill(0.0);
            for (d, s) in dst.iter_mut().zip(r.location()) {
                *d = *s;
            }
        }
        if let Some(p) = out_phi.as_mut() {
            *p = r.phi_min;
        }
        if let Some(p) = out_u2.as_mut() {
            *p = r.u2();
        }
        Ok(())
    })
}

/// Thermal critical coupling of the Dicke/Rabi family; pass `INFINITY` for zero temperature.
#[no_mangle]
pub extern "C" fn spt_critical_line_dqr(beta_delta: f64) -> f64 {
    critical_line_dqr(Beta::from_f64(beta_delta))
}

/// # Safety
/// `out_gamma_c` and `out_jump` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_critical_line_twophoton(gamma_prime: f64, out_gamma_c: *mut f64, out_jump: *mut f64) -> SptStatus {
    guard(|| {
        let (g, j) = critical_line_twophoton(gamma_prime)?;
        *out_gamma_c.as_mut().ok_or_else(|| null("out_gamma_c"))? = g;
        *out_jump.as_mut().ok_or_else(|| null("out_jump"))? = j;
        Ok(())
    })
}

/// First transition along the ray `t · direction` for `t ∈ [t_min, t_max]`.
///
/// # Safety
/// `direction` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_critical_scan(
    model: *const SptModel,
    direction: *const f64,
    len: usize,
    t_min: f64,
    t_max: f64,
    out: *mut SptTransition,
) -> SptStatus {
    guard(|| {
        let m = model_ref(model)?;
        let ray = Ray::radial(slice(direction, len)?.to_vec());
        let r = critical_scan(&m.spec, &ray, (t_min, t_max), &ScanOptions::default())?;
        let order = match r.order {
            Order::None => 0,
            Order::First => 1,
            Order::Second => 2,
        };
        *out.as_mut().ok_or_else(|| null("out"))? = SptTransition { t_c: r.t_c.unwrap_or(f64::NAN), order, jump: r.jump };
        Ok(())
    })
}

/// Ground-state photon number (summed over modes) of the finite model at macroscopicity `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_ed_ground_photon_number(model: *const SptModel, c: f64, n_max: usize, out: *mut f64) -> SptStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = m.spec.clone().with_c(c).to_physical(1.0)?;
        let r = solve_lowest(&p, m.spec.family, &HilbertSpec::for_params(&p, n_max), 1)?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.photon_number[0].iter().sum();
        Ok(())
    })
}

/// Copy the calling thread's last error message (NUL-terminated, truncated to `len`) into `buf`.
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must have room for `len` bytes, or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn spt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
