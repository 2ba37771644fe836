//! C ABI for `dstrsort`.
//!
//! Objects cross the boundary as opaque handles (`DsCorpus`, `DsResult`)
//! that the caller releases with the matching `*_free` function. Every
//! fallible call returns a [`DsStatus`]; on failure the message is available
//! from [`ds_last_error`] until the next failing call on the same thread.
//! Panics never unwind into C: they are reported as `DS_STATUS_INTERNAL`.

use dstrsort::corpus::{generate_dn, read_corpus_auto, write_corpus, CorpusFormat, DnSpec};
use dstrsort::msort::Assignment;
use dstrsort::partition::SamplingMode;
use dstrsort::report::{run_sort, Algo, SortOutcome, SortSpec, SortedOutput};
use dstrsort::strcore::StringArena;
use dstrsort::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BadSchedule = 3,
    InfeasibleSpec = 4,
    Io = 5,
    Format = 6,
    OutOfRange = 7,
    Internal = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsAlgo {
    Ms = 0,
    Pdms = 1,
    Rquick = 2,
    RquickPlus = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsSampling {
    String = 0,
    Character = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsAssignment {
    Grid = 0,
    Bounded = 1,
}

/// Sorting options; obtain defaults from `ds_sort_options_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct DsSortOptions {
    pub algo: DsAlgo,
    pub pes: u32,
    pub levels: u32,
    /// Split factors, `schedule_len` of them; NULL derives them from `levels`.
    pub schedule: *const u32,
    pub schedule_len: usize,
    pub sampling: DsSampling,
    /// 0 selects the default `2 k max(r)`.
    pub sampling_factor: u32,
    pub assignment: DsAssignment,
    pub compress_lcp: bool,
    pub seed: u64,
}

/// A string collection.
pub struct DsCorpus(StringArena);

/// Outcome of one sort: output strings or permutation, plus the JSON report.
pub struct DsResult {
    outcome: SortOutcome,
    report: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> DsStatus {
    match e {
        Error::BadSchedule { .. } | Error::DimsMismatch { .. } => DsStatus::BadSchedule,
        Error::InfeasibleSpec(_) => DsStatus::InfeasibleSpec,
        Error::Io(_) => DsStatus::Io,
        Error::Corpus(_) | Error::Decode(_) => DsStatus::Format,
        Error::ZeroByte { .. } | Error::StringTooLong(_) | Error::Config(_) | Error::EmptyGroup => {
            DsStatus::InvalidArgument
        }
        _ => DsStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (DsStatus, String)>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DsStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (DsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DsStatus, String) {
    (DsStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, (DsStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path).to_str().map_err(|_| (DsStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Message of the last failing call on this thread; empty if none.
#[no_mangle]
pub extern "C" fn ds_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// NUL-terminated library version.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ds_corpus_new() -> *mut DsCorpus {
    Box::into_raw(Box::new(DsCorpus(StringArena::new())))
}

/// # Safety
/// `corpus` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_free(corpus: *mut DsCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Appends `len` bytes; strings may not contain zero bytes.
///
/// # Safety
/// `corpus` must be a live handle and `bytes` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_push(corpus: *mut DsCorpus, bytes: *const u8, len: usize) -> DsStatus {
    guard(|| {
        let c = corpus.as_mut().ok_or_else(|| null("corpus"))?;
        let s = if len == 0 { &[][..] } else { std::slice::from_raw_parts(bytes.as_ref().ok_or_else(|| null("bytes"))?, len) };
        c.0.push(s).map_err(lib_err)
    })
}

/// # Safety
/// `corpus` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_len(corpus: *const DsCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// Borrows string `index`; the pointer stays valid while the corpus lives
/// and is not modified.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_get(
    corpus: *const DsCorpus,
    index: usize,
    out_bytes: *mut *const u8,
    out_len: *mut usize,
) -> DsStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        if out_bytes.is_null() || out_len.is_null() {
            return Err(null("output pointer"));
        }
        if index >= c.0.len() {
            return Err((DsStatus::OutOfRange, format!("index {index} of {} strings", c.0.len())));
        }
        let s = c.0.get(index);
        *out_bytes = s.as_ptr();
        *out_len = s.len();
        Ok(())
    })
}

/// Generates `n` strings of length `len` with the given D/N ratio.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_generate(
    n: usize,
    len: usize,
    dn_ratio: f64,
    sigma: u16,
    seed: u64,
    out: *mut *mut DsCorpus,
) -> DsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let arena = generate_dn(&DnSpec { n, len, dn_ratio, sigma, seed }).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DsCorpus(arena)));
        Ok(())
    })
}

/// Reads a binary or newline-delimited corpus file.
///
/// # Safety
/// `path` must be NUL-terminated, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_read(path: *const c_char, out: *mut *mut DsCorpus) -> DsStatus {
    guard(|| {
        let path = path_arg(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (arena, _) = read_corpus_auto(path).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DsCorpus(arena)));
        Ok(())
    })
}

/// Writes the corpus in binary format.
///
/// # Safety
/// `corpus` must be live, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ds_corpus_write(corpus: *const DsCorpus, path: *const c_char) -> DsStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        write_corpus(&c.0, path_arg(path)?, CorpusFormat::Binary).map_err(lib_err)
    })
}

#[no_mangle]
pub extern "C" fn ds_sort_options_default() -> DsSortOptions {
    DsSortOptions {
        algo: DsAlgo::Ms,
        pes: 1,
        levels: 1,
        schedule: ptr::null(),
        schedule_len: 0,
        sampling: DsSampling::String,
        sampling_factor: 0,
        assignment: DsAssignment::Grid,
        compress_lcp: false,
        seed: 0,
    }
}

/// Sorts `corpus` on a simulated machine and checks the result.
///
/// # Safety
/// `corpus` and `options` must be valid, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ds_sort(corpus: *const DsCorpus, options: *const DsSortOptions, out: *mut *mut DsResult) -> DsStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let schedule = match (o.schedule.is_null(), o.schedule_len) {
            (true, _) | (false, 0) => None,
            (false, n) => Some(std::slice::from_raw_parts(o.schedule, n).iter().map(|&f| f as usize).collect()),
        };
        let spec = SortSpec {
            algo: match o.algo {
                DsAlgo::Ms => Algo::Ms,
                DsAlgo::Pdms => Algo::Pdms,
                DsAlgo::Rquick => Algo::Rquick,
                DsAlgo::RquickPlus => Algo::RquickPlus,
            },
            p: o.pes as usize,
            levels: o.levels as usize,
            schedule,
            sampling: match o.sampling {
                DsSampling::String => SamplingMode::String,
                DsSampling::Character => SamplingMode::Character,
            },
            sampling_factor: (o.sampling_factor > 0).then_some(o.sampling_factor as usize),
            assignment: match o.assignment {
                DsAssignment::Grid => Assignment::Grid,
                DsAssignment::Bounded => Assignment::Bounded,
            },
            compress_lcp: o.compress_lcp,
            seed: o.seed,
        };
        let outcome = run_sort(&c.0, &spec).map_err(lib_err)?;
        let report = CString::new(outcome.report.to_json()).expect("JSON has no NUL");
        *out = Box::into_raw(Box::new(DsResult { outcome, report }));
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ds_result_free(result: *mut DsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Whether the output matched the sequential oracle.
/// # Safety
/// `result` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_result_correct(result: *const DsResult) -> bool {
    result.as_ref().is_some_and(|r| r.outcome.report.verdict.correct)
}

/// Number of output strings, or permutation entries for PDMS.
/// # Safety
/// `result` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_result_len(result: *const DsResult) -> usize {
    result.as_ref().map_or(0, |r| match &r.outcome.output {
        SortedOutput::Strings(s) => s.len(),
        SortedOutput::Permutation(p) => p.len(),
    })
}

/// Whether the result is a permutation (PDMS) rather than sorted strings.
/// # Safety
/// `result` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_result_is_permutation(result: *const DsResult) -> bool {
    result.as_ref().is_some_and(|r| matches!(r.outcome.output, SortedOutput::Permutation(_)))
}

/// Borrows the `index`-th smallest string of a string result.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_result_string(
    result: *const DsResult,
    index: usize,
    out_bytes: *mut *const u8,
    out_len: *mut usize,
) -> DsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out_bytes.is_null() || out_len.is_null() {
            return Err(null("output pointer"));
        }
        let SortedOutput::Strings(s) = &r.outcome.output else {
            return Err((DsStatus::InvalidArgument, "result holds a permutation".into()));
        };
        if index >= s.len() {
            return Err((DsStatus::OutOfRange, format!("index {index} of {} strings", s.len())));
        }
        let v = s.get(index);
        *out_bytes = v.as_ptr();
        *out_len = v.len();
        Ok(())
    })
}

/// Borrows the rank permutation of a PDMS result: entry `i` is the input
/// index of the `i`-th smallest string.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_result_permutation(
    result: *const DsResult,
    out_perm: *mut *const u64,
    out_len: *mut usize,
) -> DsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out_perm.is_null() || out_len.is_null() {
            return Err(null("output pointer"));
        }
        let SortedOutput::Permutation(p) = &r.outcome.output else {
            return Err((DsStatus::InvalidArgument, "result holds strings".into()));
        };
        *out_perm = p.as_ptr();
        *out_len = p.len();
        Ok(())
    })
}

/// The run report as NUL-terminated JSON, owned by the result.
/// # Safety
/// `result` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ds_result_report_json(result: *const DsResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.report.as_ptr())
}
