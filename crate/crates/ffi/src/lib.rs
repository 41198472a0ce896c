//! C ABI over `nic_measure`.
//!
//! Plans and fragments cross the boundary as opaque handles; everything else
//! (definable sets, values of h, reports) as NUL-terminated JSON strings.
//! Every function returns a [`NicStatus`]. On failure a description is kept
//! per thread and can be read with [`nic_last_error`]. Strings returned
//! through `out` parameters are owned by the caller and released with
//! [`nic_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use nic_measure::fragment::Fragment;
use nic_measure::measure::{dim_meas_definable, dim_meas_tuple, DefinableSet};
use nic_measure::tree::TreePlan;
use nic_measure::verify::{run_suite, Suite, SuiteConfig};

/// Result codes of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NicStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input JSON was malformed or violated a format invariant.
    Malformed = 3,
    /// The computation was rejected (missing node, bad formula, ...).
    Rejected = 4,
    /// Verification ran and found at least one failure.
    CheckFailed = 5,
    /// A panic was caught at the boundary; this is a bug.
    Internal = 6,
}

/// A validated tree plan.
pub struct NicPlan(Arc<TreePlan>);

/// A finite fragment over a plan.
pub struct NicFragment(Fragment);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Fallible<T> = Result<T, NicStatus>;

fn fail<T>(status: NicStatus, msg: impl std::fmt::Display) -> Fallible<T> {
    set_error(msg.to_string());
    Err(status)
}

/// Runs `f`, translating panics and errors into a status.
fn guard(f: impl FnOnce() -> Fallible<NicStatus>) -> NicStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) | Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            NicStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Fallible<&'a str> {
    if p.is_null() {
        return fail(NicStatus::NullArgument, format!("{name} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(e) => fail(NicStatus::InvalidUtf8, format!("{name}: {e}")),
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Fallible<&'a T> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(NicStatus::NullArgument, format!("{name} is null")),
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Fallible<NicStatus> {
    *out = Box::into_raw(Box::new(value));
    Ok(NicStatus::Ok)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Fallible<NicStatus> {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            Ok(NicStatus::Ok)
        }
        Err(e) => fail(NicStatus::Internal, e),
    }
}

fn check_out<T>(out: *mut *mut T) -> Fallible<()> {
    if out.is_null() {
        return fail(NicStatus::NullArgument, "out is null");
    }
    Ok(())
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a plan file.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_plan_from_json(json: *const c_char, out: *mut *mut NicPlan) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(json, "json")?;
        match TreePlan::from_json(text) {
            Ok(p) => put(out, NicPlan(Arc::new(p))),
            Err(e) => fail(NicStatus::Malformed, e),
        }
    })
}

/// Serializes a plan to the plan file format.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_plan_to_json(plan: *const NicPlan, out: *mut *mut c_char) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let plan = ref_arg(plan, "plan")?;
        put_string(out, serde_json::to_string(&plan.0.to_file()).expect("plans serialize"))
    })
}

/// Releases a plan. Fragments built from it stay valid. Null is ignored.
///
/// # Safety
/// `plan` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nic_plan_free(plan: *mut NicPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// The fragment tcl(∅) over `plan`.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_fragment_new(plan: *const NicPlan, out: *mut *mut NicFragment) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let plan = ref_arg(plan, "plan")?;
        put(out, NicFragment(Fragment::new(plan.0.clone())))
    })
}

/// A random fragment of at most `max_nodes` nodes, determined by `seed`.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_fragment_grow(
    plan: *const NicPlan,
    seed: u64,
    max_nodes: usize,
    out: *mut *mut NicFragment,
) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let plan = ref_arg(plan, "plan")?;
        put(out, NicFragment(Fragment::grow_random(plan.0.clone(), seed, max_nodes)))
    })
}

/// Loads a fragment dump.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_fragment_from_json(json: *const c_char, out: *mut *mut NicFragment) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(json, "json")?;
        match Fragment::from_json(text) {
            Ok(f) => put(out, NicFragment(f)),
            Err(e) => fail(NicStatus::Malformed, e),
        }
    })
}

/// Dumps a fragment; the output loads back to an equal fragment.
///
/// # Safety
/// `frag` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_fragment_to_json(frag: *const NicFragment, out: *mut *mut c_char) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let frag = ref_arg(frag, "frag")?;
        put_string(out, frag.0.to_json())
    })
}

/// Number of nodes in the fragment.
///
/// # Safety
/// `frag` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nic_fragment_len(frag: *const NicFragment, out: *mut usize) -> NicStatus {
    guard(|| {
        if out.is_null() {
            return fail(NicStatus::NullArgument, "out is null");
        }
        *out = ref_arg(frag, "frag")?.0.len();
        Ok(NicStatus::Ok)
    })
}

/// Releases a fragment. Null is ignored.
///
/// # Safety
/// `frag` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nic_fragment_free(frag: *mut NicFragment) {
    if !frag.is_null() {
        drop(Box::from_raw(frag));
    }
}

unsafe fn load_set<'a>(frag: *const NicFragment, set_json: *const c_char) -> Fallible<(&'a Fragment, DefinableSet)> {
    let frag = ref_arg(frag, "frag")?;
    let set = match DefinableSet::from_json(str_arg(set_json, "set_json")?) {
        Ok(s) => s,
        Err(e) => return fail(NicStatus::Malformed, e),
    };
    Ok((&frag.0, set))
}

/// h of a definable set whose parameters are nodes of `frag`, written as
/// `{"dim":d,"meas":"p/q"}`.
///
/// # Safety
/// `frag` must be a live handle, `set_json` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nic_measure_set(
    frag: *const NicFragment,
    set_json: *const c_char,
    out: *mut *mut c_char,
) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let (frag, set) = load_set(frag, set_json)?;
        match dim_meas_definable(frag, &set) {
            Ok(h) => put_string(out, serde_json::to_string(&h).expect("values serialize")),
            Err(e) => fail(NicStatus::Rejected, e),
        }
    })
}

/// The complete types making up a definable set, each with its value, and
/// the total: `{"types":[{"descriptor":…,"h":…}],"total":…}`.
///
/// # Safety
/// As for [`nic_measure_set`].
#[no_mangle]
pub unsafe extern "C" fn nic_decompose(
    frag: *const NicFragment,
    set_json: *const c_char,
    out: *mut *mut c_char,
) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let (frag, set) = load_set(frag, set_json)?;
        let parts = match set.decompose(frag) {
            Ok(p) => p,
            Err(e) => return fail(NicStatus::Rejected, e),
        };
        let mut types = Vec::new();
        for r in &parts {
            match dim_meas_tuple(&r.fragment, &r.tuple, &r.descriptor.base) {
                Ok(h) => types.push(serde_json::json!({ "descriptor": r.descriptor, "h": h })),
                Err(e) => return fail(NicStatus::Rejected, e),
            }
        }
        let total = match dim_meas_definable(frag, &set) {
            Ok(h) => h,
            Err(e) => return fail(NicStatus::Rejected, e),
        };
        put_string(out, serde_json::json!({ "types": types, "total": total }).to_string())
    })
}

/// Runs a verification suite (`cms`, `ms`, `nic`, `oracle` or `all`) on
/// fragments of at most `max_nodes` nodes grown from `seed`. The reports are
/// written to `out` as a JSON array (with `elapsed_ms` set to 0 so that the
/// output is deterministic) in both the `Ok` and the `CheckFailed` case.
///
/// # Safety
/// `plan` must be a live handle, `suite` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nic_verify(
    plan: *const NicPlan,
    suite: *const c_char,
    seed: u64,
    max_nodes: usize,
    out: *mut *mut c_char,
) -> NicStatus {
    guard(|| {
        check_out(out)?;
        let plan = ref_arg(plan, "plan")?;
        let name = str_arg(suite, "suite")?;
        let Some(suite) = Suite::parse(name) else {
            return fail(NicStatus::Malformed, format!("unknown suite {name:?}"));
        };
        let cfg = SuiteConfig { seed, max_nodes, ..SuiteConfig::default() };
        let mut reports = run_suite(&plan.0, suite, &cfg);
        reports.iter_mut().for_each(|r| r.elapsed_ms = 0);
        let passed = reports.iter().all(|r| r.passed());
        put_string(out, serde_json::to_string(&reports).expect("reports serialize"))?;
        if passed {
            Ok(NicStatus::Ok)
        } else {
            fail(NicStatus::CheckFailed, "verification found failures")
        }
    })
}
