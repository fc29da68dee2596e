//! Exercises the C ABI the way a C caller would: raw pointers, status
//! codes, explicit frees.

use std::ffi::{CStr, CString};
use std::ptr;

use seplr_ffi::*;

#[test]
fn full_lifecycle_over_the_c_surface() {
    let dir = tempfile::tempdir().unwrap();
    let index_path = CString::new(
        dir.path().join("toy.slrx").to_str().unwrap(),
    )
    .unwrap();

    // 3 targets x 2 dims
    let values = [1.0f64, 0.0, 0.5, 0.5, 0.0, 1.0];
    unsafe {
        let factors = seplr_factors_new_dense(3, 2, values.as_ptr());
        assert!(!factors.is_null());
        assert_eq!(seplr_factors_num_targets(factors), 3);
        assert_eq!(seplr_factors_num_dims(factors), 2);

        let index = seplr_index_build(factors);
        assert!(!index.is_null());
        assert_eq!(seplr_index_num_targets(index), 3);

        assert_eq!(
            seplr_index_save(index, index_path.as_ptr()),
            SeplrStatus::SeplrOk
        );
        let loaded = seplr_index_load(index_path.as_ptr());
        assert!(!loaded.is_null());

        let query = [2.0f64, 1.0];
        let mut topk: *mut SeplrTopK = ptr::null_mut();
        let status = seplr_query(
            loaded,
            factors,
            query.as_ptr(),
            2,
            2,
            SeplrAlgorithm::SeplrThreshold,
            0,
            &mut topk,
        );
        assert_eq!(status, SeplrStatus::SeplrOk);
        assert_eq!(seplr_topk_len(topk), 2);
        assert_eq!(seplr_topk_target(topk, 0), 0);
        assert_eq!(seplr_topk_score(topk, 0), 2.0);
        assert!(seplr_topk_is_exact(topk));
        assert_eq!(seplr_topk_lower_bound(topk), seplr_topk_upper_bound(topk));
        assert!(seplr_topk_full_scores(topk) >= 2);
        assert!(seplr_topk_target(topk, 9) == u32::MAX);
        assert!(seplr_topk_score(topk, 9).is_nan());

        seplr_topk_free(topk);
        seplr_index_free(loaded);
        seplr_index_free(index);
        seplr_factors_free(factors);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        // dimension mismatch: query has wrong length
        let values = [1.0f64, 0.0, 0.5, 0.5];
        let factors = seplr_factors_new_dense(2, 2, values.as_ptr());
        let index = seplr_index_build(factors);
        let query = [1.0f64, 2.0, 3.0];
        let mut topk: *mut SeplrTopK = ptr::null_mut();
        let status = seplr_query(
            index,
            factors,
            query.as_ptr(),
            3,
            1,
            SeplrAlgorithm::SeplrNaive,
            0,
            &mut topk,
        );
        assert_eq!(status, SeplrStatus::SeplrInvalidArgument);
        assert!(topk.is_null());
        let msg = CStr::from_ptr(seplr_last_error_message());
        assert!(!msg.to_bytes().is_empty());

        // missing file maps to the I/O status
        let missing = CString::new("/definitely/not/here.slrx").unwrap();
        assert!(seplr_index_load(missing.as_ptr()).is_null());

        // null pointers are rejected, never dereferenced
        assert_eq!(
            seplr_query(
                index,
                factors,
                ptr::null(),
                0,
                1,
                SeplrAlgorithm::SeplrNaive,
                0,
                &mut topk
            ),
            SeplrStatus::SeplrInvalidArgument
        );
        seplr_index_free(index);
        seplr_factors_free(factors);
    }
}

#[test]
fn header_is_generated_with_the_exported_symbols() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/seplr.h");
    let text = std::fs::read_to_string(header).unwrap();
    for symbol in [
        "seplr_factors_new_dense",
        "seplr_index_build",
        "seplr_index_save",
        "seplr_index_load",
        "seplr_query",
        "seplr_topk_len",
        "seplr_topk_target",
        "seplr_topk_score",
        "seplr_topk_free",
        "seplr_last_error_message",
    ] {
        assert!(text.contains(symbol), "missing {symbol} in seplr.h");
    }
}
