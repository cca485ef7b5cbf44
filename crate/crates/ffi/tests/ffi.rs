use std::ffi::{CStr, CString};
use std::ptr;

use branchcount_ffi::*;

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    bc_string_free(p);
    s
}

unsafe fn last_error() -> String {
    CStr::from_ptr(bc_last_error_message()).to_str().unwrap().to_owned()
}

#[test]
fn branch_set_lifecycle() {
    unsafe {
        let mut set = ptr::null_mut();
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        assert_eq!(bc_realistic_measurement(c, 0.0, s, 0.0, 4, 2, &mut set), BcStatus::Ok);
        assert!(!set.is_null());

        let mut len = 0;
        assert_eq!(bc_branchset_len(set, &mut len), BcStatus::Ok);
        assert_eq!(len, 6);

        let mut total = 0.0;
        for i in 0..len {
            let mut w = 0.0;
            assert_eq!(bc_branchset_weight(set, i, &mut w), BcStatus::Ok);
            total += w;
        }
        assert!((total - 1.0).abs() < 1e-14);

        let mut w = 0.0;
        assert_eq!(bc_branchset_weight(set, 0, &mut w), BcStatus::Ok);
        assert!((w - c * c / 4.0).abs() < 1e-15);

        let mut label = ptr::null_mut();
        assert_eq!(bc_branchset_label(set, 5, &mut label), BcStatus::Ok);
        assert_eq!(take_string(label), "down:2");

        assert_eq!(bc_branchset_weight(set, 6, &mut w), BcStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let (mut up, mut down) = (0u64, 0u64);
        assert_eq!(bc_count_equi_amplitude(set, 1e-4, &mut up, &mut down), BcStatus::Ok);
        assert_eq!((up, down), ((c * c / 1e-4 + 1e-9).floor() as u64, (s * s / 1e-4 + 1e-9).floor() as u64));
        assert_eq!(bc_count_equi_amplitude(set, 0.5, &mut up, &mut down), BcStatus::InvalidArgument);

        bc_branchset_free(set);
        bc_branchset_free(ptr::null_mut());
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut len = 0;
        assert_eq!(bc_branchset_len(ptr::null(), &mut len), BcStatus::NullPointer);
        assert!(last_error().contains("set"));
        assert_eq!(bc_realistic_measurement(1.0, 0.0, 0.0, 0.0, 1, 1, ptr::null_mut()), BcStatus::NullPointer);
        assert_eq!(bc_planck_multiplicity(3, 2, ptr::null_mut()), BcStatus::NullPointer);
        assert_eq!(bc_run_config_json(ptr::null(), ptr::null_mut()), BcStatus::NullPointer);
        bc_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_states_are_rejected() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(bc_realistic_measurement(0.0, 0.0, 0.0, 0.0, 2, 2, &mut set), BcStatus::InvalidArgument);
        assert!(set.is_null());
        assert_eq!(bc_realistic_measurement(f64::NAN, 0.0, 1.0, 0.0, 2, 2, &mut set), BcStatus::InvalidArgument);
        assert_eq!(bc_realistic_measurement(1.0, 0.0, 1.0, 0.0, 0, 2, &mut set), BcStatus::InvalidArgument);
    }
}

#[test]
fn planck_multiplicity_as_decimal() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(bc_planck_multiplicity(3, 2, &mut out), BcStatus::Ok);
        assert_eq!(take_string(out), "6");
        assert_eq!(bc_planck_multiplicity(10_000, 1000, &mut out), BcStatus::Ok);
        let big = take_string(out);
        assert!(big.len() > 30 && big.bytes().all(|b| b.is_ascii_digit()));
        assert_eq!(bc_planck_multiplicity(0, 2, &mut out), BcStatus::InvalidArgument);
    }
}

#[test]
fn config_runs_through_json() {
    unsafe {
        let cfg = CString::new(r#"{"scenario":"continuity","params":{"k_max":3}}"#).unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(bc_run_config_json(cfg.as_ptr(), &mut out), BcStatus::Ok);
        let env: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(env["result"]["continuity"]["table"].as_array().unwrap().len(), 4);

        let bad = CString::new(r#"{"scenario":"continuity","params":{"k_max":0}}"#).unwrap();
        assert_eq!(bc_run_config_json(bad.as_ptr(), &mut out), BcStatus::ConfigError);
        assert!(last_error().contains("params.k_max"));

        let numeric =
            CString::new(r#"{"scenario":"qbm","params":{"record_strength":0,"require_decoherence":true}}"#).unwrap();
        assert_eq!(bc_run_config_json(numeric.as_ptr(), &mut out), BcStatus::NumericError);
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(bc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/branchcount.h")).unwrap();
    for name in [
        "typedef struct BcBranchSet BcBranchSet;",
        "BC_STATUS_OK = 0",
        "BC_STATUS_PANIC = 5",
        "bc_realistic_measurement(",
        "bc_branchset_len(",
        "bc_branchset_weight(",
        "bc_branchset_label(",
        "bc_count_equi_amplitude(",
        "bc_planck_multiplicity(",
        "bc_run_config_json(",
        "bc_last_error_message(",
        "bc_string_free(",
        "bc_branchset_free(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
