//! C ABI over the branchcount toolkit.
//!
//! Every function returns a [`BcStatus`]; results come back through out
//! pointers. Strings handed out are owned by the caller and released with
//! [`bc_string_free`]; branch sets with [`bc_branchset_free`]. After a
//! failure, [`bc_last_error_message`] describes it on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use branchcount::counting::{count_equi_amplitude, Tau};
use branchcount::histories::BranchSet;
use branchcount::models::{realistic_measurement, spin_grouping, RealisticApparatus, SpinState};
use branchcount::qcore::Complex;
use branchcount::runner::{run, ErrorKind, ExperimentConfig};
use branchcount::statmech::planck_multiplicity;
use branchcount::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericError = 4,
    Panic = 5,
}

/// Opaque set of branches.
pub struct BcBranchSet {
    inner: BranchSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BcStatus {
    match err {
        Error::InvalidArgument(_) | Error::TauTooLarge { .. } | Error::DimensionMismatch { .. } => {
            BcStatus::InvalidArgument
        }
        other => match ErrorKind::of(other) {
            ErrorKind::Config => BcStatus::ConfigError,
            ErrorKind::Numeric => BcStatus::NumericError,
        },
    }
}

/// Runs `body`, turning errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> Result<(), (BcStatus, String)>>(body: F) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BcStatus::Panic
        }
    }
}

fn lift<T>(r: branchcount::Result<T>) -> Result<T, (BcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (BcStatus, String) {
    (BcStatus::NullPointer, format!("{what} is null"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior NULs in generated text").into_raw()
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Spin `a|↑> + b|↓>` measured by an apparatus with `n_up` and `n_down`
/// equally weighted microrecords.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn bc_realistic_measurement(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    n_up: usize,
    n_down: usize,
    out: *mut *mut BcBranchSet,
) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spin = lift(SpinState::new(Complex::new(a_re, a_im), Complex::new(b_re, b_im)))?;
        let bs = lift(realistic_measurement(spin, &RealisticApparatus::uniform(n_up, n_down)))?;
        *out = Box::into_raw(Box::new(BcBranchSet { inner: bs }));
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not be freed; `out_len` must be
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bc_branchset_len(set: *const BcBranchSet, out_len: *mut usize) -> BcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out_len = out_len.as_mut().ok_or_else(|| null("out_len"))?;
        *out_len = set.inner.len();
        Ok(())
    })
}

/// Squared norm of branch `index`.
///
/// # Safety
/// As for [`bc_branchset_len`].
#[no_mangle]
pub unsafe extern "C" fn bc_branchset_weight(set: *const BcBranchSet, index: usize, out_weight: *mut f64) -> BcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out_weight = out_weight.as_mut().ok_or_else(|| null("out_weight"))?;
        let branch = set.inner.entries().get(index).ok_or_else(|| {
            (BcStatus::InvalidArgument, format!("index {index} out of range for {} branches", set.inner.len()))
        })?;
        *out_weight = branch.weight;
        Ok(())
    })
}

/// History label of branch `index`, e.g. `up:3`. Free with [`bc_string_free`].
///
/// # Safety
/// As for [`bc_branchset_len`].
#[no_mangle]
pub unsafe extern "C" fn bc_branchset_label(set: *const BcBranchSet, index: usize, out: *mut *mut c_char) -> BcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let branch = set.inner.entries().get(index).ok_or_else(|| {
            (BcStatus::InvalidArgument, format!("index {index} out of range for {} branches", set.inner.len()))
        })?;
        *out = into_c_string(branch.label.to_string());
        Ok(())
    })
}

/// Equi-amplitude counts of the `up` and `down` outcomes with fine-grained
/// branches of squared norm `tau_sq`.
///
/// # Safety
/// `set` as for [`bc_branchset_len`]; both out pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_count_equi_amplitude(
    set: *const BcBranchSet,
    tau_sq: f64,
    out_up: *mut u64,
    out_down: *mut u64,
) -> BcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out_up = out_up.as_mut().ok_or_else(|| null("out_up"))?;
        let out_down = out_down.as_mut().ok_or_else(|| null("out_down"))?;
        let g = lift(spin_grouping(&set.inner))?;
        let report = lift(Tau::from_sq(tau_sq).and_then(|t| count_equi_amplitude(&set.inner, &g, t)))?;
        *out_up = report.count("up").unwrap_or(0);
        *out_down = report.count("down").unwrap_or(0);
        Ok(())
    })
}

/// `(z+n−1)! / (n! (z−1)!)` as a decimal string. Free with [`bc_string_free`].
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn bc_planck_multiplicity(z: u64, n: u64, out: *mut *mut c_char) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if z == 0 {
            return Err((BcStatus::InvalidArgument, "z must be at least 1".into()));
        }
        *out = into_c_string(planck_multiplicity(z, n).to_str_radix(10));
        Ok(())
    })
}

/// Runs an experiment config given as JSON and returns the result envelope
/// as JSON. Free the result with [`bc_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_envelope` valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn bc_run_config_json(config_json: *const c_char, out_envelope: *mut *mut c_char) -> BcStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        if out_envelope.is_null() {
            return Err(null("out_envelope"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| (BcStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let config = lift(ExperimentConfig::from_json(text))?;
        let envelope = lift(run(&config))?;
        *out_envelope = into_c_string(envelope.to_json());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn bc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `set` must be null or a set returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn bc_branchset_free(set: *mut BcBranchSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
