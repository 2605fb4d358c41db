//! C ABI over `cox_orderflow`.
//!
//! Objects are opaque handles created by `*_new`/`cox_simulate`/`cox_estimate_*`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`CoxStatus`]; on failure `cox_last_error_message` describes the error for
//! the calling thread. Results are written through out-pointers.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cox_orderflow::estimation::{check_regime, EstimationResult, EventStream};
use cox_orderflow::model::{simulate, ModelParams, ResponseFunction, SimulationRecord};
use cox_orderflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoxStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidParams = 3,
    InvalidResponse = 4,
    NotInSkeleton = 5,
    Empty = 6,
    CannotNormalize = 7,
    WindowUnderflow = 8,
    Precondition = 9,
    Parse = 10,
    Config = 11,
    Io = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

impl From<&Error> for CoxStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => CoxStatus::Domain,
            Error::InvalidParams(_) => CoxStatus::InvalidParams,
            Error::InvalidResponse(_) => CoxStatus::InvalidResponse,
            Error::NotInSkeleton(_) => CoxStatus::NotInSkeleton,
            Error::Empty(_) => CoxStatus::Empty,
            Error::CannotNormalize => CoxStatus::CannotNormalize,
            Error::WindowUnderflow { .. } => CoxStatus::WindowUnderflow,
            Error::Precondition(_) => CoxStatus::Precondition,
            Error::Parse { .. } => CoxStatus::Parse,
            Error::Config(_) => CoxStatus::Config,
            Error::Io { .. } => CoxStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoxResponseKind {
    Linear = 0,
    Cubic = 1,
    Constant = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxParams {
    pub sigma: f64,
    pub mu: f64,
    pub horizon: f64,
    pub bins: usize,
    pub p0: u64,
    pub seed: u64,
}

impl From<CoxParams> for ModelParams {
    fn from(p: CoxParams) -> Self {
        ModelParams { sigma: p.sigma, mu: p.mu, horizon: p.horizon, bins: p.bins, p0: p.p0, seed: p.seed }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxRegime {
    pub intensity_ratio: f64,
    pub coarse_bin_ratio: f64,
    pub sparse_bin_ratio: f64,
    pub passes: bool,
    /// Feasible bin counts; both zero when the range is empty.
    pub min_bins: usize,
    pub max_bins: usize,
}

pub struct CoxResponse(ResponseFunction);

pub struct CoxRecord(SimulationRecord);

pub struct CoxEstimate {
    result: EstimationResult,
    stream: EventStream,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (CoxStatus, String)>) -> CoxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoxStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CoxStatus::Panic
        }
    }
}

fn fail(e: Error) -> (CoxStatus, String) {
    (CoxStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (CoxStatus, String) {
    (CoxStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CoxStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (CoxStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (CoxStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cox_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn cox_response_new(kind: CoxResponseKind, out: *mut *mut CoxResponse) -> CoxStatus {
    guard(|| {
        let h = match kind {
            CoxResponseKind::Linear => ResponseFunction::linear(),
            CoxResponseKind::Cubic => ResponseFunction::cubic(),
            CoxResponseKind::Constant => ResponseFunction::constant(),
        };
        write(out, Box::into_raw(Box::new(CoxResponse(h))), "out")
    })
}

/// Piecewise-linear response through `(u[i], h[i])`; the nodes must span
/// [0, 1] and integrate to one.
#[no_mangle]
pub unsafe extern "C" fn cox_response_table(
    u: *const f64,
    h: *const f64,
    len: usize,
    out: *mut *mut CoxResponse,
) -> CoxStatus {
    guard(|| {
        let u = slice(u, len, "u")?.to_vec();
        let h = slice(h, len, "h")?.to_vec();
        let r = ResponseFunction::table(u, h).map_err(fail)?;
        write(out, Box::into_raw(Box::new(CoxResponse(r))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_response_eval(response: *const CoxResponse, u: f64, out: *mut f64) -> CoxStatus {
    guard(|| {
        let r = deref(response, "response")?;
        if !(0.0..1.0).contains(&u) {
            return Err(fail(Error::Domain(format!("u = {u} outside [0, 1)"))));
        }
        write(out, r.0.eval(u), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_response_inverse(response: *const CoxResponse, t: f64, out: *mut f64) -> CoxStatus {
    guard(|| {
        let r = deref(response, "response")?;
        write(out, r.0.inverse(t), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_response_free(response: *mut CoxResponse) {
    if !response.is_null() {
        drop(Box::from_raw(response));
    }
}

/// Simulates replicate `replicate` of `params` by exact thinning.
#[no_mangle]
pub unsafe extern "C" fn cox_simulate(
    params: *const CoxParams,
    response: *const CoxResponse,
    replicate: u64,
    out: *mut *mut CoxRecord,
) -> CoxStatus {
    guard(|| {
        let p: ModelParams = (*deref(params, "params")?).into();
        let r = deref(response, "response")?;
        let rec = simulate(&p, &r.0, replicate).map_err(fail)?;
        write(out, Box::into_raw(Box::new(CoxRecord(rec))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_record_event_count(record: *const CoxRecord, out: *mut usize) -> CoxStatus {
    guard(|| write(out, deref(record, "record")?.0.event_count(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn cox_record_u0(record: *const CoxRecord, out: *mut f64) -> CoxStatus {
    guard(|| write(out, deref(record, "record")?.0.u0, "out"))
}

/// Copies the event times into `buffer`, which must hold `capacity` values;
/// `written` receives the event count even when the buffer is too small.
#[no_mangle]
pub unsafe extern "C" fn cox_record_event_times(
    record: *const CoxRecord,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> CoxStatus {
    guard(|| {
        let times = &deref(record, "record")?.0.event_times;
        write(written, times.len(), "written")?;
        if times.len() > capacity {
            return Err((CoxStatus::BufferTooSmall, format!("{} event times do not fit in {capacity}", times.len())));
        }
        if !times.is_empty() {
            if buffer.is_null() {
                return Err(null("buffer"));
            }
            ptr::copy_nonoverlapping(times.as_ptr(), buffer, times.len());
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_record_free(record: *mut CoxRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

fn boxed_estimate(stream: EventStream, bins: usize) -> Result<*mut CoxEstimate, (CoxStatus, String)> {
    let result = cox_orderflow::estimation::estimate(&stream, bins).map_err(fail)?;
    Ok(Box::into_raw(Box::new(CoxEstimate { result, stream })))
}

#[no_mangle]
pub unsafe extern "C" fn cox_estimate_from_record(
    record: *const CoxRecord,
    bins: usize,
    out: *mut *mut CoxEstimate,
) -> CoxStatus {
    guard(|| {
        let stream = deref(record, "record")?.0.to_event_stream();
        let e = boxed_estimate(stream, bins)?;
        write(out, e, "out")
    })
}

/// Estimates from strictly increasing event times in (0, horizon].
#[no_mangle]
pub unsafe extern "C" fn cox_estimate_from_events(
    times: *const f64,
    len: usize,
    horizon: f64,
    bins: usize,
    out: *mut *mut CoxEstimate,
) -> CoxStatus {
    guard(|| {
        let times = slice(times, len, "times")?.to_vec();
        let stream = EventStream::new(times, horizon, None).map_err(fail)?;
        let e = boxed_estimate(stream, bins)?;
        write(out, e, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_estimate_mu_hat(estimate: *const CoxEstimate, out: *mut f64) -> CoxStatus {
    guard(|| write(out, deref(estimate, "estimate")?.result.mu_hat, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn cox_estimate_h(estimate: *const CoxEstimate, u: f64, out: *mut f64) -> CoxStatus {
    guard(|| {
        let v = deref(estimate, "estimate")?.result.h_hat(u).map_err(fail)?;
        write(out, v, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_estimate_h_inverse(estimate: *const CoxEstimate, t: f64, out: *mut f64) -> CoxStatus {
    guard(|| write(out, deref(estimate, "estimate")?.result.h_inv_hat(t), "out"))
}

/// Fractional-price estimate at time `t` from the trailing bin-width window.
#[no_mangle]
pub unsafe extern "C" fn cox_estimate_y(estimate: *const CoxEstimate, t: f64, out: *mut f64) -> CoxStatus {
    guard(|| {
        let e = deref(estimate, "estimate")?;
        let y = e.result.estimate_y(&e.stream, t).map_err(fail)?;
        write(out, y, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cox_estimate_bins(estimate: *const CoxEstimate, out: *mut usize) -> CoxStatus {
    guard(|| write(out, deref(estimate, "estimate")?.result.bins(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn cox_estimate_free(estimate: *mut CoxEstimate) {
    if !estimate.is_null() {
        drop(Box::from_raw(estimate));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cox_check_regime(params: *const CoxParams, out: *mut CoxRegime) -> CoxStatus {
    guard(|| {
        let p: ModelParams = (*deref(params, "params")?).into();
        p.validate().map_err(fail)?;
        let r = check_regime(&p);
        let (min_bins, max_bins) = r.feasible_bins().unwrap_or((0, 0));
        let regime = CoxRegime {
            intensity_ratio: r.intensity_ratio,
            coarse_bin_ratio: r.coarse_bin_ratio,
            sparse_bin_ratio: r.sparse_bin_ratio,
            passes: r.passes(),
            min_bins,
            max_bins,
        };
        write(out, regime, "out")
    })
}
