//! C ABI for lineheat: streaming line tracking over `git log -p` output,
//! pairwise change classification and the label statistics.
//!
//! Every fallible function returns an [`LhStatus`]; on failure a message is
//! available from [`lh_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released with
//! [`lh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use lineheat::bots::{bot_verdict, BotConfig};
use lineheat::churn::categorize_file;
use lineheat::classify::{
    chao1, classify_pair, cohens_kappa, Chao1Input, ClassifierConfig, Pattern, RevisionPair,
};
use lineheat::diff::{LogEvent, LogParser};
use lineheat::track::{write_line_reports, HistoryReplay};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    NotFound = 4,
    InvalidArgument = 5,
    TrackError = 6,
    Panic = 7,
}

/// Opaque streaming tracker.
pub struct LhTracker {
    parser: LogParser,
    replay: HistoryReplay,
    events: Vec<LogEvent>,
    finished: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: LhStatus, msg: impl Into<String>) -> LhStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LhStatus) -> LhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(LhStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, LhStatus> {
    if p.is_null() {
        return Err(fail(LhStatus::NullPointer, format!("{what} is null")));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(LhStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lh_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).unwrap())
        .as_ptr()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn lh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[no_mangle]
pub extern "C" fn lh_tracker_new() -> *mut LhTracker {
    Box::into_raw(Box::new(LhTracker {
        parser: LogParser::new(),
        replay: HistoryReplay::new(),
        events: Vec::new(),
        finished: false,
    }))
}

/// # Safety
/// `tracker` must be null or come from [`lh_tracker_new`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn lh_tracker_free(tracker: *mut LhTracker) {
    if !tracker.is_null() {
        drop(unsafe { Box::from_raw(tracker) });
    }
}

/// Feeds a chunk of `git log -p` output in the lineheat pretty format.
/// Chunks may split lines anywhere.
///
/// # Safety
/// `tracker` must be valid; `data` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn lh_tracker_feed(
    tracker: *mut LhTracker,
    data: *const u8,
    len: usize,
) -> LhStatus {
    guard(|| {
        let Some(t) = (unsafe { tracker.as_mut() }) else {
            return fail(LhStatus::NullPointer, "tracker is null");
        };
        if data.is_null() && len > 0 {
            return fail(LhStatus::NullPointer, "data is null");
        }
        if t.finished {
            return fail(LhStatus::InvalidArgument, "tracker already finished");
        }
        let bytes = if len == 0 {
            &[][..]
        } else {
            unsafe { std::slice::from_raw_parts(data, len) }
        };
        if let Err(e) = t.parser.feed(bytes, &mut t.events) {
            return fail(LhStatus::ParseError, e.to_string());
        }
        for ev in t.events.drain(..) {
            t.replay.handle(&ev);
        }
        LhStatus::Ok
    })
}

/// Flushes the stream. Feeding after this fails.
///
/// # Safety
/// `tracker` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lh_tracker_finish(tracker: *mut LhTracker) -> LhStatus {
    guard(|| {
        let Some(t) = (unsafe { tracker.as_mut() }) else {
            return fail(LhStatus::NullPointer, "tracker is null");
        };
        if t.finished {
            return LhStatus::Ok;
        }
        t.finished = true;
        if let Err(e) = t.parser.finish(&mut t.events) {
            return fail(LhStatus::ParseError, e.to_string());
        }
        for ev in t.events.drain(..) {
            t.replay.handle(&ev);
        }
        LhStatus::Ok
    })
}

fn with_file<'a>(t: &'a LhTracker, path: &str) -> Result<&'a lineheat::track::FileState, LhStatus> {
    if let Some(err) = t.replay.failures().get(path) {
        return Err(fail(LhStatus::TrackError, format!("{path}: {err}")));
    }
    t.replay
        .file(path)
        .ok_or_else(|| fail(LhStatus::NotFound, format!("{path} is not tracked")))
}

/// Number of live lines of `path`.
///
/// # Safety
/// `tracker` must be valid, `path` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lh_tracker_line_count(
    tracker: *const LhTracker,
    path: *const c_char,
    out: *mut usize,
) -> LhStatus {
    guard(|| {
        let (Some(t), false) = (unsafe { tracker.as_ref() }, out.is_null()) else {
            return fail(LhStatus::NullPointer, "null argument");
        };
        let path = match unsafe { str_arg(path, "path") } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match with_file(t, path) {
            Ok(state) => {
                unsafe { *out = state.file_lines.len() };
                LhStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Per-line report of `path` as CSV (line_number, content, mod_count,
/// birth_ts, commit_hashes, timestamps). Free `*out` with [`lh_string_free`].
///
/// # Safety
/// `tracker` must be valid, `path` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lh_tracker_report_csv(
    tracker: *const LhTracker,
    path: *const c_char,
    out: *mut *mut c_char,
) -> LhStatus {
    guard(|| {
        let (Some(t), false) = (unsafe { tracker.as_ref() }, out.is_null()) else {
            return fail(LhStatus::NullPointer, "null argument");
        };
        let path = match unsafe { str_arg(path, "path") } {
            Ok(p) => p,
            Err(s) => return s,
        };
        let state = match with_file(t, path) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let mut buf = Vec::new();
        if let Err(e) = write_line_reports(&mut buf, &state.finalize()) {
            return fail(LhStatus::InvalidArgument, e.to_string());
        }
        match CString::new(buf) {
            Ok(s) => {
                unsafe { *out = s.into_raw() };
                LhStatus::Ok
            }
            Err(_) => fail(LhStatus::InvalidArgument, "report contains NUL"),
        }
    })
}

fn pattern_names() -> &'static [CString] {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES.get_or_init(|| {
        Pattern::ALL
            .iter()
            .map(|p| CString::new(p.name()).unwrap())
            .collect()
    })
}

/// Number of pattern codes; valid codes are `0..lh_pattern_count()`.
#[no_mangle]
pub extern "C" fn lh_pattern_count() -> i32 {
    Pattern::ALL.len() as i32
}

/// Static name of a pattern code, or null for an invalid code.
#[no_mangle]
pub extern "C" fn lh_pattern_name(code: i32) -> *const c_char {
    usize::try_from(code)
        .ok()
        .and_then(|i| pattern_names().get(i))
        .map_or(std::ptr::null(), |s| s.as_ptr())
}

/// Classifies one before/after revision pair of a line in the file `path`.
/// Writes a pattern code to `out`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lh_classify_pair(
    before: *const c_char,
    after: *const c_char,
    ts_before: i64,
    ts_after: i64,
    path: *const c_char,
    out: *mut i32,
) -> LhStatus {
    guard(|| {
        if out.is_null() {
            return fail(LhStatus::NullPointer, "out is null");
        }
        let args = unsafe {
            (
                str_arg(before, "before"),
                str_arg(after, "after"),
                str_arg(path, "path"),
            )
        };
        let (before, after, path) = match args {
            (Ok(b), Ok(a), Ok(p)) => (b, a, p),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        let pair = RevisionPair {
            before: before.as_bytes(),
            after: after.as_bytes(),
            ts_before,
            ts_after,
            file_category: categorize_file(path),
            path,
        };
        match classify_pair(&pair, &ClassifierConfig::default()) {
            Ok(c) => {
                let code = Pattern::ALL
                    .iter()
                    .position(|&p| p == c.pattern)
                    .expect("pattern listed");
                unsafe { *out = code as i32 };
                LhStatus::Ok
            }
            Err(e) => fail(LhStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Chao1 richness estimate.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lh_chao1(s_obs: u64, f1: u64, f2: u64, out: *mut f64) -> LhStatus {
    if out.is_null() {
        return fail(LhStatus::NullPointer, "out is null");
    }
    unsafe { *out = chao1(Chao1Input { s_obs, f1, f2 }) };
    LhStatus::Ok
}

/// Cohen's kappa over two equally long arrays of integer labels.
///
/// # Safety
/// `a` and `b` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lh_cohens_kappa(
    a: *const i32,
    b: *const i32,
    n: usize,
    out: *mut f64,
) -> LhStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(LhStatus::NullPointer, "null argument");
        }
        let (a, b) = unsafe {
            (
                std::slice::from_raw_parts(a, n),
                std::slice::from_raw_parts(b, n),
            )
        };
        match cohens_kappa(a, b) {
            Ok(k) => {
                unsafe { *out = k.kappa };
                LhStatus::Ok
            }
            Err(e) => fail(LhStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Whether a committer identity looks like a bot under the default rules.
///
/// # Safety
/// `name` and `email` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lh_is_bot(
    name: *const c_char,
    email: *const c_char,
    out: *mut bool,
) -> LhStatus {
    guard(|| {
        if out.is_null() {
            return fail(LhStatus::NullPointer, "out is null");
        }
        let (name, email) = match unsafe { (str_arg(name, "name"), str_arg(email, "email")) } {
            (Ok(n), Ok(e)) => (n, e),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        static DEFAULT: OnceLock<BotConfig> = OnceLock::new();
        unsafe { *out = bot_verdict(name, email, DEFAULT.get_or_init(BotConfig::default)).0 };
        LhStatus::Ok
    })
}
