//! C interface to the inear-rr estimator.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new` function and released by the matching `*_free`. Functions return
//! an [`InearStatus`]; on failure [`inear_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use inear_rr::io::{read_wav, Engine, PipelineConfig};
use inear_rr::signal::Signal;
use inear_rr::{ActivityClass, Error, PipelineKind, RrEstimate};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InearStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parameter = 3,
    Input = 4,
    Config = 5,
    Model = 6,
    Template = 7,
    LowQuality = 8,
    OutOfRange = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InearPipeline {
    None = -1,
    Rsa = 0,
    Lrc = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InearActivity {
    Sedentary = 0,
    ActiveLow = 1,
    ActiveHigh = 2,
    Undetermined = 3,
}

/// One window's result. `rr_bpm` is NaN when `valid` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InearEstimate {
    pub window_start_s: f64,
    pub window_end_s: f64,
    pub pipeline: InearPipeline,
    pub activity: InearActivity,
    pub rr_bpm: f64,
    pub valid: u8,
}

/// Opaque configuration handle.
pub struct InearConfig(PipelineConfig);

/// Opaque estimator handle.
pub struct InearEngine(Engine);

/// Opaque list of window results.
pub struct InearResults(Vec<InearEstimate>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> InearStatus {
    match e {
        Error::Parameter(_) | Error::Similarity(_) | Error::Training(_) => InearStatus::Parameter,
        Error::LowQuality(_) => InearStatus::LowQuality,
        Error::Template(_) => InearStatus::Template,
        Error::Model(_) => InearStatus::Model,
        Error::Config(_) => InearStatus::Config,
        Error::Input { .. } | Error::Io { .. } => InearStatus::Input,
    }
}

fn fail(status: InearStatus, msg: &str) -> InearStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), (InearStatus, String)>) -> InearStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            InearStatus::Ok
        }
        Ok(Err((s, m))) => fail(s, &m),
        Err(_) => fail(InearStatus::Internal, "internal panic"),
    }
}

fn lib_err(e: Error) -> (InearStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (InearStatus, String) {
    (InearStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (InearStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (InearStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn to_c(e: &RrEstimate) -> InearEstimate {
    InearEstimate {
        window_start_s: e.window_start,
        window_end_s: e.window_end,
        pipeline: match e.pipeline {
            None => InearPipeline::None,
            Some(PipelineKind::Rsa) => InearPipeline::Rsa,
            Some(PipelineKind::Lrc) => InearPipeline::Lrc,
        },
        activity: match e.activity {
            ActivityClass::Sedentary => InearActivity::Sedentary,
            ActivityClass::ActiveLow => InearActivity::ActiveLow,
            ActivityClass::ActiveHigh => InearActivity::ActiveHigh,
            ActivityClass::Undetermined => InearActivity::Undetermined,
        },
        rr_bpm: match (e.valid, e.rr) {
            (true, Some(rr)) => rr,
            _ => f64::NAN,
        },
        valid: u8::from(e.valid),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn inear_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn inear_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// A configuration holding the defaults.
#[no_mangle]
pub extern "C" fn inear_config_new() -> *mut InearConfig {
    Box::into_raw(Box::new(InearConfig(PipelineConfig::default())))
}

/// Reads a `key = value` configuration file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn inear_config_load(path: *const c_char, out: *mut *mut InearConfig) -> InearStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let cfg = PipelineConfig::load(Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(InearConfig(cfg)));
        Ok(())
    })
}

/// Sets one configuration key; the whole configuration is validated when
/// an engine is built from it.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn inear_config_set(
    cfg: *mut InearConfig,
    key: *const c_char,
    value: *const c_char,
) -> InearStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        cfg.0.set(key, value).map_err(lib_err)
    })
}

/// # Safety
/// `cfg` must come from this library or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inear_config_free(cfg: *mut InearConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds an engine, loading any model or template files the configuration
/// names. `cfg` may be null for the defaults.
///
/// # Safety
/// `cfg` must come from this library or be null; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn inear_engine_new(cfg: *const InearConfig, out: *mut *mut InearEngine) -> InearStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let config = cfg.as_ref().map(|c| c.0.clone()).unwrap_or_default();
        let engine = Engine::new(config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(InearEngine(engine)));
        Ok(())
    })
}

/// # Safety
/// `engine` must come from this library or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inear_engine_free(engine: *mut InearEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

fn store(out: *mut *mut InearResults, est: &[RrEstimate]) {
    let list = est.iter().map(to_c).collect();
    // SAFETY: callers checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(InearResults(list))) };
}

/// Estimates every window of `n_samples` samples per channel. `right` may be
/// null for a single channel.
///
/// # Safety
/// `left` (and `right` when non-null) must point to `n_samples` floats.
#[no_mangle]
pub unsafe extern "C" fn inear_engine_estimate(
    engine: *const InearEngine,
    left: *const f32,
    right: *const f32,
    n_samples: usize,
    sample_rate: f64,
    out: *mut *mut InearResults,
) -> InearStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        if left.is_null() {
            return Err(null("left"));
        }
        let channel = |p: *const f32| {
            let data = std::slice::from_raw_parts(p, n_samples);
            Signal::new(data.iter().map(|&v| f64::from(v)).collect(), sample_rate).map_err(lib_err)
        };
        let mut channels = vec![channel(left)?];
        if !right.is_null() {
            channels.push(channel(right)?);
        }
        let est = engine.0.estimate_channels(&channels).map_err(lib_err)?;
        store(out, &est);
        Ok(())
    })
}

/// Reads a WAV file and estimates every window.
///
/// # Safety
/// `engine` must come from this library, `path` must be NUL-terminated and
/// `out` valid.
#[no_mangle]
pub unsafe extern "C" fn inear_engine_estimate_file(
    engine: *const InearEngine,
    path: *const c_char,
    out: *mut *mut InearResults,
) -> InearStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        let path = str_arg(path, "path")?;
        let channels = read_wav(Path::new(path)).map_err(lib_err)?;
        let est = engine.0.estimate_channels(&channels).map_err(lib_err)?;
        store(out, &est);
        Ok(())
    })
}

/// Number of windows in `results`; 0 for null.
///
/// # Safety
/// `results` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn inear_results_len(results: *const InearResults) -> usize {
    results.as_ref().map_or(0, |r| r.0.len())
}

/// Copies window `index` into `*out`.
///
/// # Safety
/// `results` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn inear_results_get(
    results: *const InearResults,
    index: usize,
    out: *mut InearEstimate,
) -> InearStatus {
    guard(|| {
        let results = results.as_ref().ok_or_else(|| null("results"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = *results.0.get(index).ok_or_else(|| {
            (
                InearStatus::OutOfRange,
                format!("index {index} out of range for {} windows", results.0.len()),
            )
        })?;
        Ok(())
    })
}

/// # Safety
/// `results` must come from this library or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inear_results_free(results: *mut InearResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
