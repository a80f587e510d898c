use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qflow_ffi::*;

const TELEPORT: &str = "wires a:2 b:2 c:2\n\
Q t=1 on (b,c) omega=bell lambda=bell label=P1\n\
Q t=2 on (a,b) omega=bell lambda=bell label=P2\n";

fn parse(src: &str) -> *mut QfDiagram {
    let src = CString::new(src).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { qf_diagram_parse(src.as_ptr(), &mut d) }, QfStatus::Ok);
    assert!(!d.is_null());
    d
}

fn take(s: *mut c_char) -> String {
    let owned = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { qf_string_free(s) };
    owned
}

fn last_error() -> String {
    let p = qf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn teleport_moves_input_to_last_wire() {
    let d = parse(TELEPORT);
    let mut n = 0;
    assert_eq!(unsafe { qf_input_dim(d, &mut n) }, QfStatus::Ok);
    assert_eq!(n, 8);
    // |φ⟩ = 0.6|0⟩ + 0.8i|1⟩ on a, |00⟩ on b,c
    let mut input = vec![0.0; 16];
    input[0] = 0.6;
    input[4 * 2 + 1] = 0.8;
    let mut output = vec![0.0; 16];
    let mut len = 0;
    let st = unsafe { qf_simulate(d, input.as_ptr(), 8, output.as_mut_ptr(), 8, &mut len) };
    assert_eq!(st, QfStatus::Ok);
    assert_eq!(len, 8);
    // output c carries φ; a and b are left in |00⟩ after the projection chain
    let norm: f64 = output.iter().map(|x| x * x).sum();
    assert!(norm > 0.0);
    let c0 = (output[0], output[1]);
    let c1 = (output[2], output[3]);
    let scale = (c0.0 * c0.0 + c0.1 * c0.1 + c1.0 * c1.0 + c1.1 * c1.1).sqrt();
    assert!((c0.0 / scale - 0.6).abs() < 1e-12 && (c1.1 / scale - 0.8).abs() < 1e-12);
    unsafe { qf_diagram_free(d) };
}

#[test]
fn small_buffer_reports_needed_length() {
    let d = parse(TELEPORT);
    let input = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut out = [0.0; 2];
    let mut len = 0;
    let st = unsafe { qf_simulate(d, input.as_ptr(), 8, out.as_mut_ptr(), 1, &mut len) };
    assert_eq!(st, QfStatus::BufferTooSmall);
    assert_eq!(len, 8);
    assert!(last_error().contains("8"));
    let st = unsafe { qf_simulate(d, input.as_ptr(), 3, out.as_mut_ptr(), 1, &mut len) };
    assert_eq!(st, QfStatus::InvalidArgument);
    unsafe { qf_diagram_free(d) };
}

#[test]
fn verify_and_json_outputs() {
    let d = parse(TELEPORT);
    let (mut pass, mut err) = (false, f64::NAN);
    let mut report = ptr::null_mut();
    let st = unsafe { qf_verify(d, 5, 1, 1e-9, &mut pass, &mut err, &mut report) };
    assert_eq!(st, QfStatus::Ok);
    assert!(pass && err < 1e-9);
    let v: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
    assert_eq!(v["trials"], 5);

    let st = unsafe { qf_verify(d, 0, 1, 1e-9, &mut pass, &mut err, ptr::null_mut()) };
    assert_eq!(st, QfStatus::InvalidArgument);

    let mut canon = ptr::null_mut();
    assert_eq!(unsafe { qf_canon_json(d, true, 3, &mut canon) }, QfStatus::Ok);
    let forms: serde_json::Value = serde_json::from_str(&take(canon)).unwrap();
    assert_eq!(forms[0]["class"], "processor");
    assert!(forms[0]["dsl"].is_string());

    let mut dot = ptr::null_mut();
    assert_eq!(unsafe { qf_render(d, 0, &mut dot) }, QfStatus::Ok);
    assert!(take(dot).starts_with("digraph"));
    assert_eq!(unsafe { qf_render(d, 9, &mut dot) }, QfStatus::InvalidArgument);
    unsafe { qf_diagram_free(d) };
}

#[test]
fn teleport_demo_passes() {
    let mut pass = false;
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qf_teleport_demo(3, 7, &mut pass, &mut out) }, QfStatus::Ok);
    assert!(pass);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 9);
    assert_eq!(unsafe { qf_teleport_demo(1, 7, &mut pass, &mut out) }, QfStatus::InvalidArgument);
}

#[test]
fn errors_set_status_and_message() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { qf_diagram_parse(ptr::null(), &mut d) }, QfStatus::NullPointer);
    let bad = CString::new("wires a:2\nQ t=1 on (a,z) omega=bell lambda=bell\n").unwrap();
    assert_eq!(unsafe { qf_diagram_parse(bad.as_ptr(), &mut d) }, QfStatus::ParseError);
    assert!(last_error().contains("line 2"));
    let invalid = [0xffu8, 0xfe, 0];
    let st = unsafe { qf_diagram_parse(invalid.as_ptr() as *const c_char, &mut d) };
    assert_eq!(st, QfStatus::InvalidUtf8);
    let mut n = 0;
    assert_eq!(unsafe { qf_input_dim(ptr::null(), &mut n) }, QfStatus::NullPointer);
    let ok = parse(TELEPORT);
    assert!(qf_last_error_message().is_null());
    unsafe {
        qf_diagram_free(ok);
        qf_diagram_free(ptr::null_mut());
        qf_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qflow.h")).unwrap();
    for name in [
        "typedef struct QfDiagram QfDiagram",
        "QF_STATUS_OK = 0",
        "qf_diagram_parse",
        "qf_diagram_free",
        "qf_input_dim",
        "qf_simulate",
        "qf_verify",
        "qf_canon_json",
        "qf_render",
        "qf_teleport_demo",
        "qf_string_free",
        "qf_last_error_message",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/qflow.h");
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
