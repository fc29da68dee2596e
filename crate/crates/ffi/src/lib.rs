//! C ABI for the seplr retrieval engine.
//!
//! All handles are opaque pointers owned by this library; every `*_new`
//! or `*_load` has a matching `*_free`. Fallible calls return a
//! `SeplrStatus`; on failure `seplr_last_error_message` returns a
//! thread-local, NUL-terminated description valid until the next
//! failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use seplr::index::{build_index, SortedIndex};
use seplr::ingest::load_dense;
use seplr::model::{QueryVector, TargetFactors};
use seplr::retrieval::{
    fagin_topk, halted_threshold_topk, naive_topk, partial_threshold_topk, threshold_topk,
    TopKResult,
};
use seplr::Error;

/// Result code for fallible calls.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SeplrStatus {
    /// Success.
    SeplrOk = 0,
    /// A pointer was null or an argument was out of range.
    SeplrInvalidArgument = 1,
    /// File could not be read or written.
    SeplrIo = 2,
    /// Index file failed validation (magic, version or checksum).
    SeplrCorrupt = 3,
    /// The algorithm refuses this input (e.g. Fagin on a sparse index).
    SeplrUnsupported = 4,
    /// Any other error; see seplr_last_error_message.
    SeplrInternal = 5,
}

/// Retrieval algorithm selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SeplrAlgorithm {
    SeplrNaive = 0,
    SeplrFagin = 1,
    SeplrThreshold = 2,
    SeplrPartial = 3,
    SeplrHalted = 4,
}

/// Opaque handle to a target-factor matrix.
pub struct SeplrFactors(TargetFactors);

/// Opaque handle to a sorted-list index.
pub struct SeplrIndex(SortedIndex);

/// Opaque handle to a top-K result set.
pub struct SeplrTopK(TopKResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(e: &Error) -> SeplrStatus {
    let msg = CString::new(e.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    match e {
        Error::FaginSparseIndex => SeplrStatus::SeplrUnsupported,
        Error::Io { .. } => SeplrStatus::SeplrIo,
        Error::BadMagic { .. }
        | Error::BadVersion { .. }
        | Error::Truncated { .. }
        | Error::ChecksumMismatch { .. } => SeplrStatus::SeplrCorrupt,
        Error::DimensionMismatch { .. }
        | Error::InvalidK
        | Error::InvalidBudget
        | Error::NonFinite { .. } => SeplrStatus::SeplrInvalidArgument,
        _ => SeplrStatus::SeplrInternal,
    }
}

fn set_error_str(msg: &str) -> SeplrStatus {
    let msg = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    SeplrStatus::SeplrInvalidArgument
}

/// Returns the message of the most recent failure on this thread.
///
/// The pointer stays valid until the next failing call on the same
/// thread. Never returns null.
#[no_mangle]
pub extern "C" fn seplr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, SeplrStatus> {
    if ptr.is_null() {
        return Err(set_error_str("path is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(set_error_str("path is not valid UTF-8")),
    }
}

/// Creates dense target factors from a row-major values buffer of
/// length `num_targets * num_dims`. Returns null on error.
///
/// # Safety
/// `values` must point to `num_targets * num_dims` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn seplr_factors_new_dense(
    num_targets: usize,
    num_dims: usize,
    values: *const f64,
) -> *mut SeplrFactors {
    if values.is_null() {
        set_error_str("values is null");
        return ptr::null_mut();
    }
    let data = std::slice::from_raw_parts(values, num_targets * num_dims).to_vec();
    match TargetFactors::dense(num_targets, num_dims, data) {
        Ok(t) => Box::into_raw(Box::new(SeplrFactors(t))),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Loads dense target factors from a CSV file. Returns null on error.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn seplr_factors_load_dense(path: *const c_char) -> *mut SeplrFactors {
    let path = match path_from(path) {
        Ok(p) => p,
        Err(_) => return ptr::null_mut(),
    };
    let t = load_dense(path).and_then(|m| TargetFactors::from_matrix(&m));
    match t {
        Ok(t) => Box::into_raw(Box::new(SeplrFactors(t))),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Number of targets in a factors handle.
///
/// # Safety
/// `factors` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_factors_num_targets(factors: *const SeplrFactors) -> usize {
    if factors.is_null() {
        return 0;
    }
    (*factors).0.num_targets()
}

/// Number of latent dimensions in a factors handle.
///
/// # Safety
/// `factors` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_factors_num_dims(factors: *const SeplrFactors) -> usize {
    if factors.is_null() {
        return 0;
    }
    (*factors).0.num_dims()
}

/// Frees a factors handle. Null is a no-op.
///
/// # Safety
/// `factors` must be null or a live handle; it must not be used after.
#[no_mangle]
pub unsafe extern "C" fn seplr_factors_free(factors: *mut SeplrFactors) {
    if !factors.is_null() {
        drop(Box::from_raw(factors));
    }
}

/// Builds a sorted-list index over the given factors. Never fails for
/// a live handle; returns null only if `factors` is null.
///
/// # Safety
/// `factors` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_index_build(factors: *const SeplrFactors) -> *mut SeplrIndex {
    if factors.is_null() {
        set_error_str("factors is null");
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(SeplrIndex(build_index(&(*factors).0))))
}

/// Writes an index to a file.
///
/// # Safety
/// `index` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn seplr_index_save(
    index: *const SeplrIndex,
    path: *const c_char,
) -> SeplrStatus {
    if index.is_null() {
        return set_error_str("index is null");
    }
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match (*index).0.save(path) {
        Ok(()) => SeplrStatus::SeplrOk,
        Err(e) => set_error(&e),
    }
}

/// Reads an index from a file. Returns null on error (missing file,
/// corruption, version mismatch).
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn seplr_index_load(path: *const c_char) -> *mut SeplrIndex {
    let path = match path_from(path) {
        Ok(p) => p,
        Err(_) => return ptr::null_mut(),
    };
    match SortedIndex::load(path) {
        Ok(idx) => Box::into_raw(Box::new(SeplrIndex(idx))),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Number of targets covered by an index.
///
/// # Safety
/// `index` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_index_num_targets(index: *const SeplrIndex) -> usize {
    if index.is_null() {
        return 0;
    }
    (*index).0.num_targets()
}

/// Frees an index handle. Null is a no-op.
///
/// # Safety
/// `index` must be null or a live handle; it must not be used after.
#[no_mangle]
pub unsafe extern "C" fn seplr_index_free(index: *mut SeplrIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Runs a top-K query. On success writes a result handle to `out`.
///
/// `budget` is only read for `SeplrHalted` (sorted-access depth limit,
/// must be >= 1). The factors handle must describe the same targets the
/// index was built from.
///
/// # Safety
/// `index`, `factors` and `out` must be live pointers; `query` must
/// point to `query_len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn seplr_query(
    index: *const SeplrIndex,
    factors: *const SeplrFactors,
    query: *const f64,
    query_len: usize,
    k: usize,
    algorithm: SeplrAlgorithm,
    budget: usize,
    out: *mut *mut SeplrTopK,
) -> SeplrStatus {
    if index.is_null() || factors.is_null() || query.is_null() || out.is_null() {
        return set_error_str("null pointer argument");
    }
    let values = std::slice::from_raw_parts(query, query_len).to_vec();
    let u = match QueryVector::new(values) {
        Ok(u) => u,
        Err(e) => return set_error(&e),
    };
    let idx = &(*index).0;
    let t = &(*factors).0;
    let res = match algorithm {
        SeplrAlgorithm::SeplrNaive => naive_topk(&u, t, k),
        SeplrAlgorithm::SeplrFagin => fagin_topk(&u, idx, t, k),
        SeplrAlgorithm::SeplrThreshold => threshold_topk(&u, idx, t, k),
        SeplrAlgorithm::SeplrPartial => partial_threshold_topk(&u, idx, t, k),
        SeplrAlgorithm::SeplrHalted => halted_threshold_topk(&u, idx, t, k, budget),
    };
    match res {
        Ok(r) => {
            *out = Box::into_raw(Box::new(SeplrTopK(r)));
            SeplrStatus::SeplrOk
        }
        Err(e) => set_error(&e),
    }
}

/// Number of entries in a result (at most K, fewer if the database is
/// smaller).
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_len(topk: *const SeplrTopK) -> usize {
    if topk.is_null() {
        return 0;
    }
    (*topk).0.entries.len()
}

/// Target id at a rank (0 = best). Returns u32::MAX if out of range.
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_target(topk: *const SeplrTopK, rank: usize) -> u32 {
    if topk.is_null() {
        return u32::MAX;
    }
    let res = &(*topk).0;
    if rank >= res.entries.len() {
        return u32::MAX;
    }
    res.entries[rank].target
}

/// Score at a rank (0 = best). Returns NaN if out of range.
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_score(topk: *const SeplrTopK, rank: usize) -> f64 {
    if topk.is_null() {
        return f64::NAN;
    }
    let res = &(*topk).0;
    if rank >= res.entries.len() {
        return f64::NAN;
    }
    res.entries[rank].score
}

/// Whether the result is exact. Always true except for the halted
/// algorithm when the depth budget was exhausted.
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_is_exact(topk: *const SeplrTopK) -> bool {
    if topk.is_null() {
        return false;
    }
    (*topk).0.exact
}

/// Lower bound on the K-th best score (equals it when exact).
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_lower_bound(topk: *const SeplrTopK) -> f64 {
    if topk.is_null() {
        return f64::NAN;
    }
    (*topk).0.lower_bound
}

/// Upper bound on any unseen score (equals the lower bound when exact).
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_upper_bound(topk: *const SeplrTopK) -> f64 {
    if topk.is_null() {
        return f64::NAN;
    }
    (*topk).0.upper_bound
}

/// Number of full score evaluations the query performed.
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_full_scores(topk: *const SeplrTopK) -> usize {
    if topk.is_null() {
        return 0;
    }
    (*topk).0.stats.full_scores_computed as usize
}

/// Sorted-access depth the query reached.
///
/// # Safety
/// `topk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_depth(topk: *const SeplrTopK) -> usize {
    if topk.is_null() {
        return 0;
    }
    (*topk).0.stats.depth_reached as usize
}

/// Frees a result handle. Null is a no-op.
///
/// # Safety
/// `topk` must be null or a live handle; it must not be used after.
#[no_mangle]
pub unsafe extern "C" fn seplr_topk_free(topk: *mut SeplrTopK) {
    if !topk.is_null() {
        drop(Box::from_raw(topk));
    }
}
