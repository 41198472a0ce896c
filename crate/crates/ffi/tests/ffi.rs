//! Calls through the C ABI, as a foreign caller would make them.

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use nic_measure_ffi::*;
use serde_json::{json, Value};

const P1: &str = r#"{"nodes":[{"path":[],"lambda":"one"},{"path":[0],"lambda":"inf","component":"random_graph"}]}"#;
const ADJ: &str = r#"{"params":[[[0,0]]],"arity":1,"formula":["rel","E","x0","p0"]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a string handed out by the library.
unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let owned = CStr::from_ptr(s).to_str().unwrap().to_owned();
    nic_string_free(s);
    owned
}

unsafe fn last_error() -> String {
    let p = nic_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn plan() -> *mut NicPlan {
    let mut p = ptr::null_mut();
    assert_eq!(nic_plan_from_json(c(P1).as_ptr(), &mut p), NicStatus::Ok);
    p
}

#[test]
fn plans_load_and_serialize() {
    unsafe {
        let p = plan();
        let mut s = ptr::null_mut();
        assert_eq!(nic_plan_to_json(p, &mut s), NicStatus::Ok);
        let v: Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
        nic_plan_free(p);

        let mut q = ptr::null_mut();
        let bad = c(r#"{"nodes":[{"path":[0],"lambda":"inf"}]}"#);
        assert_eq!(nic_plan_from_json(bad.as_ptr(), &mut q), NicStatus::Malformed);
        assert!(q.is_null());
        assert!(!last_error().is_empty());
    }
}

#[test]
fn measuring_the_adjacency_set() {
    unsafe {
        let p = plan();
        let mut f = ptr::null_mut();
        assert_eq!(nic_fragment_grow(p, 3, 6, &mut f), NicStatus::Ok);
        nic_plan_free(p);

        let mut s = ptr::null_mut();
        assert_eq!(nic_measure_set(f, c(ADJ).as_ptr(), &mut s), NicStatus::Ok);
        assert_eq!(serde_json::from_str::<Value>(&take(s)).unwrap(), json!({ "dim": 1, "meas": "1/2" }));

        assert_eq!(nic_decompose(f, c(ADJ).as_ptr(), &mut s), NicStatus::Ok);
        let v: Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["total"], json!({ "dim": 1, "meas": "1/2" }));
        assert_eq!(v["types"].as_array().unwrap().len(), 1);

        let missing = c(r#"{"params":[[[0,999]]],"arity":1,"formula":["rel","E","x0","p0"]}"#);
        assert_eq!(nic_measure_set(f, missing.as_ptr(), &mut s), NicStatus::Rejected);
        assert_eq!(nic_measure_set(f, c("{").as_ptr(), &mut s), NicStatus::Malformed);
        nic_fragment_free(f);
    }
}

#[test]
fn fragments_round_trip() {
    unsafe {
        let p = plan();
        let mut f = ptr::null_mut();
        assert_eq!(nic_fragment_grow(p, 11, 8, &mut f), NicStatus::Ok);
        let mut n = 0usize;
        assert_eq!(nic_fragment_len(f, &mut n), NicStatus::Ok);
        assert!((1..=8).contains(&n));

        let mut s = ptr::null_mut();
        assert_eq!(nic_fragment_to_json(f, &mut s), NicStatus::Ok);
        let dump = take(s);
        let mut g = ptr::null_mut();
        assert_eq!(nic_fragment_from_json(c(&dump).as_ptr(), &mut g), NicStatus::Ok);
        assert_eq!(nic_fragment_to_json(g, &mut s), NicStatus::Ok);
        assert_eq!(take(s), dump);

        let mut e = ptr::null_mut();
        assert_eq!(nic_fragment_new(p, &mut e), NicStatus::Ok);
        assert_eq!(nic_fragment_len(e, &mut n), NicStatus::Ok);
        assert_eq!(n, 1);

        for h in [f, g, e] {
            nic_fragment_free(h);
        }
        nic_plan_free(p);
    }
}

#[test]
fn verification_reports() {
    unsafe {
        let p = plan();
        let mut s = ptr::null_mut();
        assert_eq!(nic_verify(p, c("cms").as_ptr(), 42, 6, &mut s), NicStatus::Ok);
        let v: Value = serde_json::from_str(&take(s)).unwrap();
        for rep in v.as_array().unwrap() {
            assert_eq!(rep["failures"], json!([]));
            assert_eq!(rep["elapsed_ms"], json!(0));
        }
        assert_eq!(nic_verify(p, c("everything").as_ptr(), 42, 6, &mut s), NicStatus::Malformed);
        assert!(last_error().contains("everything"));
        nic_plan_free(p);
    }
}

#[test]
fn bad_arguments_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(nic_plan_from_json(ptr::null(), &mut p), NicStatus::NullArgument);
        assert_eq!(nic_plan_from_json(c(P1).as_ptr(), ptr::null_mut()), NicStatus::NullArgument);
        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(nic_plan_from_json(invalid.as_ptr().cast(), &mut p), NicStatus::InvalidUtf8);

        let mut f = ptr::null_mut();
        assert_eq!(nic_fragment_new(ptr::null(), &mut f), NicStatus::NullArgument);
        let mut s = ptr::null_mut();
        assert_eq!(nic_fragment_to_json(ptr::null(), &mut s), NicStatus::NullArgument);
        assert_eq!(nic_fragment_len(ptr::null(), ptr::null_mut()), NicStatus::NullArgument);
        assert!(last_error().contains("null"));

        nic_plan_free(ptr::null_mut());
        nic_fragment_free(ptr::null_mut());
        nic_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(nic_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nic_measure.h")).unwrap()
}

#[test]
fn header_declares_the_whole_surface() {
    let h = header();
    for name in [
        "nic_last_error",
        "nic_version",
        "nic_string_free",
        "nic_plan_from_json",
        "nic_plan_to_json",
        "nic_plan_free",
        "nic_fragment_new",
        "nic_fragment_grow",
        "nic_fragment_from_json",
        "nic_fragment_to_json",
        "nic_fragment_len",
        "nic_fragment_free",
        "nic_measure_set",
        "nic_decompose",
        "nic_verify",
        "typedef struct NicPlan NicPlan",
        "typedef struct NicFragment NicFragment",
        "NIC_STATUS_OK = 0",
        "NIC_STATUS_INTERNAL = 6",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Compiles a small C caller against the header when a C compiler is around.
#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("caller.c");
    std::fs::write(
        &src,
        r#"#include "nic_measure.h"
int main(void) {
    NicPlan *plan = NULL;
    char *out = NULL;
    size_t n = 0;
    NicFragment *frag = NULL;
    if (nic_plan_from_json("{}", &plan) != NIC_STATUS_OK) return 1;
    nic_fragment_grow(plan, 1, 4, &frag);
    nic_fragment_len(frag, &n);
    nic_verify(plan, "ms", 0, 4, &out);
    nic_string_free(out);
    nic_fragment_free(frag);
    nic_plan_free(plan);
    return 0;
}
"#,
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
