//! C ABI for the cf-synth rule learner.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Fallible calls return a [`CfStatus`]; on failure the message is available
//! from [`cf_last_error`] on the same thread. Strings returned through out
//! pointers are owned by the caller and released with [`cf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cf_synth::column::{load_task, Task};
use cf_synth::pipeline::{Engine, EngineConfig, LearnOutcome};
use cf_synth::rule::Rule;
use cf_synth::service::{response_from_outcome, SuggestResponse};
use cf_synth::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidTask = 3,
    InvalidConfig = 4,
    InvalidRule = 5,
    NoObservedExamples = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

/// A configured learner.
pub struct CfEngine {
    engine: Engine,
}

/// A column with its observed examples.
pub struct CfTask {
    task: Task,
}

/// Ranked suggestions from one learn call.
pub struct CfResult {
    response: SuggestResponse,
    rule_texts: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: CfStatus, msg: impl Into<String>) -> CfStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> CfStatus {
    match e {
        Error::Config(_) => CfStatus::InvalidConfig,
        Error::Syntax { .. }
        | Error::UnknownPredicate(_)
        | Error::Arity { .. }
        | Error::InvalidPredicate(_)
        | Error::InvalidRule(_)
        | Error::EmptyRule => CfStatus::InvalidRule,
        _ => CfStatus::InvalidTask,
    }
}

/// Runs `f`, converting panics into [`CfStatus::Panic`].
fn guard(f: impl FnOnce() -> CfStatus) -> CfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CfStatus::Panic, format!("internal error: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, CfStatus> {
    if p.is_null() {
        return Err(fail(CfStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CfStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

fn into_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on this thread.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates an engine from TOML configuration text; null means defaults.
///
/// # Safety
/// `config_toml` is null or a nul-terminated string; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_engine_new(config_toml: *const c_char, out: *mut *mut CfEngine) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let config = if config_toml.is_null() {
            EngineConfig::default()
        } else {
            let text = match str_arg(config_toml, "config_toml") {
                Ok(t) => t,
                Err(s) => return s,
            };
            match EngineConfig::from_toml(text) {
                Ok(c) => c,
                Err(e) => return fail(status_of(&e), e.to_string()),
            }
        };
        match Engine::new(config) {
            Ok(engine) => {
                *out = Box::into_raw(Box::new(CfEngine { engine }));
                CfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `engine` is null or a handle from [`cf_engine_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_engine_free(engine: *mut CfEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Parses a task in the task JSON schema.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_task_from_json(json: *const c_char, out: *mut *mut CfTask) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match load_task(text) {
            Ok(task) => {
                *out = Box::into_raw(Box::new(CfTask { task }));
                CfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Number of cells in the task's column.
///
/// # Safety
/// `task` is null or a live task handle.
#[no_mangle]
pub unsafe extern "C" fn cf_task_len(task: *const CfTask) -> usize {
    task.as_ref().map_or(0, |t| t.task.len())
}

/// # Safety
/// `task` is null or a handle from [`cf_task_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_task_free(task: *mut CfTask) {
    if !task.is_null() {
        drop(Box::from_raw(task));
    }
}

fn result_from(outcome: LearnOutcome) -> CfResult {
    let response = response_from_outcome(outcome, "A1");
    let rule_texts = response
        .suggestions
        .iter()
        .map(|s| CString::new(s.rule_text.replace('\0', " ")).expect("no interior nul"))
        .collect();
    CfResult { response, rule_texts }
}

/// Learns ranked rules for `task`.
///
/// # Safety
/// `engine` and `task` are live handles; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_engine_learn(
    engine: *const CfEngine,
    task: *const CfTask,
    out: *mut *mut CfResult,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let (Some(engine), Some(task)) = (engine.as_ref(), task.as_ref()) else {
            return fail(CfStatus::NullArgument, "`engine` or `task` is null");
        };
        if task.task.observed.is_empty() {
            return fail(CfStatus::NoObservedExamples, "at least one observed formatted example is required");
        }
        match engine.engine.learn(&task.task) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(result_from(outcome)));
                CfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Number of suggestions; 0 for a null handle.
///
/// # Safety
/// `result` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn cf_result_count(result: *const CfResult) -> usize {
    result.as_ref().map_or(0, |r| r.response.suggestions.len())
}

unsafe fn suggestion<'a>(
    result: *const CfResult,
    index: usize,
) -> Result<(&'a CfResult, &'a cf_synth::service::SuggestionBody), CfStatus> {
    let r = result
        .as_ref()
        .ok_or_else(|| fail(CfStatus::NullArgument, "`result` is null"))?;
    let s = r.response.suggestions.get(index).ok_or_else(|| {
        fail(
            CfStatus::IndexOutOfRange,
            format!("index {index} out of range for {} suggestions", r.response.suggestions.len()),
        )
    })?;
    Ok((r, s))
}

/// Rule text of suggestion `index`, borrowed from `result`.
///
/// # Safety
/// `result` is a live result handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_result_rule_text(
    result: *const CfResult,
    index: usize,
    out: *mut *const c_char,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        match suggestion(result, index) {
            Ok((r, _)) => {
                *out = r.rule_texts[index].as_ptr();
                CfStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Score of suggestion `index`.
///
/// # Safety
/// `result` is a live result handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_result_score(result: *const CfResult, index: usize, out: *mut f64) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        match suggestion(result, index) {
            Ok((_, s)) => {
                *out = s.score;
                CfStatus::Ok
            }
            Err(st) => st,
        }
    })
}

/// Per-cell formats of suggestion `index`, borrowed from `result`.
///
/// # Safety
/// `result` is a live result handle; `data` and `len` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cf_result_formats(
    result: *const CfResult,
    index: usize,
    data: *mut *const u32,
    len: *mut usize,
) -> CfStatus {
    guard(|| {
        if data.is_null() || len.is_null() {
            return fail(CfStatus::NullArgument, "`data` or `len` is null");
        }
        match suggestion(result, index) {
            Ok((_, s)) => {
                *data = s.per_cell_formats.as_ptr();
                *len = s.per_cell_formats.len();
                CfStatus::Ok
            }
            Err(st) => st,
        }
    })
}

/// The whole result as JSON, in the service's suggest response schema.
///
/// # Safety
/// `result` is a live result handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_result_to_json(result: *const CfResult, out: *mut *mut c_char) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let Some(r) = result.as_ref() else {
            return fail(CfStatus::NullArgument, "`result` is null");
        };
        let json = serde_json::to_string(&r.response).expect("response serializes");
        *out = into_c_string(&json);
        CfStatus::Ok
    })
}

/// # Safety
/// `result` is null or a handle from [`cf_engine_learn`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_result_free(result: *mut CfResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Simplest rule found that formats the task's column like `rule_text`.
///
/// # Safety
/// `engine` and `task` are live handles, `rule_text` is a nul-terminated
/// string and `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_engine_simplify(
    engine: *const CfEngine,
    task: *const CfTask,
    rule_text: *const c_char,
    out: *mut *mut c_char,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return fail(CfStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let (Some(engine), Some(task)) = (engine.as_ref(), task.as_ref()) else {
            return fail(CfStatus::NullArgument, "`engine` or `task` is null");
        };
        let text = match str_arg(rule_text, "rule_text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Rule::parse(text) {
            Ok(rule) => {
                let simplified = engine.engine.simplify(&rule, &task.task.column);
                *out = into_c_string(&simplified.to_string());
                CfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is null or a string returned through an owned out pointer, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
