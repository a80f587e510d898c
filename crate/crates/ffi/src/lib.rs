//! C interface to qflow.
//!
//! Diagrams are opaque [`QfDiagram`] handles created by [`qf_diagram_parse`]
//! and released with [`qf_diagram_free`]. Every call returns a [`QfStatus`];
//! on failure [`qf_last_error_message`] describes the error on the calling
//! thread. Strings handed out by the library are released with
//! [`qf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qflow::canon::{canonical_dsl, unravel_component, VMode};
use qflow::diagram::{parse, render, ComponentClass, Diagram, RenderStyle, Topology};
use qflow::eval::{simulate_direct, teleport_demo};
use qflow::tensor::{random_state, State, WireDecl};
use qflow::verify::{equivalence_check, CheckOptions};
use qflow::C64;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    EvalError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque diagram handle.
pub struct QfDiagram {
    inner: Diagram,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(QfStatus, String);

impl Failure {
    fn new(status: QfStatus, msg: impl std::fmt::Display) -> Self {
        Self(status, msg.to_string())
    }
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QfStatus::Panic
        }
    }
}

unsafe fn diagram<'a>(d: *const QfDiagram) -> Result<&'a Diagram, Failure> {
    d.as_ref().map(|d| &d.inner).ok_or_else(|| Failure::new(QfStatus::NullPointer, "null diagram handle"))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::new(QfStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure::new(QfStatus::InvalidUtf8, e))
}

unsafe fn hand_out(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(QfStatus::NullPointer, "null output pointer"));
    }
    let c = CString::new(s).map_err(|e| Failure::new(QfStatus::EvalError, e))?;
    *out = c.into_raw();
    Ok(())
}

fn to_json(v: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure::new(QfStatus::EvalError, e))
}

/// Parses diagram source text into a new handle stored in `*out`.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_diagram_parse(src: *const c_char, out: *mut *mut QfDiagram) -> QfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::new(QfStatus::NullPointer, "null output pointer"));
        }
        let d = parse(text(src)?).map_err(|e| Failure::new(QfStatus::ParseError, e))?;
        *out = Box::into_raw(Box::new(QfDiagram { inner: d }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `d` must come from [`qf_diagram_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qf_diagram_free(d: *mut QfDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Total dimension of the input wires, the length (in complex numbers) of
/// the input expected by [`qf_simulate`].
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_input_dim(d: *const QfDiagram, out: *mut usize) -> QfStatus {
    guard(|| {
        let d = diagram(d)?;
        if out.is_null() {
            return Err(Failure::new(QfStatus::NullPointer, "null output pointer"));
        }
        *out = d.input_wires().iter().map(|w| w.dim).product();
        Ok(())
    })
}

/// Runs the diagram on an input ket over its input wires (ascending id,
/// first wire most significant). Amplitudes are interleaved `re, im` pairs:
/// `input` holds `2 * input_len` doubles. The output, over all output wires
/// in ascending id order, is written to `output` (capacity `2 * output_cap`
/// doubles) and its length in complex numbers to `*output_len`. When the
/// buffer is too small nothing is written except `*output_len`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn qf_simulate(
    d: *const QfDiagram,
    input: *const f64,
    input_len: usize,
    output: *mut f64,
    output_cap: usize,
    output_len: *mut usize,
) -> QfStatus {
    guard(|| {
        let d = diagram(d)?;
        if input.is_null() || output_len.is_null() {
            return Err(Failure::new(QfStatus::NullPointer, "null buffer"));
        }
        let raw = std::slice::from_raw_parts(input, 2 * input_len);
        let amps: Vec<C64> = raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
        let phi = State::ket(d.input_wires(), amps).map_err(|e| Failure::new(QfStatus::InvalidArgument, e))?;
        let psi = simulate_direct(d, &phi).map_err(|e| Failure::new(QfStatus::EvalError, e))?;
        *output_len = psi.len();
        if output_cap < psi.len() || (output.is_null() && !psi.is_empty()) {
            return Err(Failure::new(
                QfStatus::BufferTooSmall,
                format!("output needs {} complex entries", psi.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(output, 2 * psi.len());
        for (k, a) in psi.amps().iter().enumerate() {
            dst[2 * k] = a.re;
            dst[2 * k + 1] = a.im;
        }
        Ok(())
    })
}

/// Cross-checks every semantics against direct simulation on `trials`
/// seeded trials. `*pass` and `*max_rel_err` receive the summary;
/// `report_json`, when not null, receives the full report.
///
/// # Safety
/// `d` must be a live handle; `pass` and `max_rel_err` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qf_verify(
    d: *const QfDiagram,
    trials: usize,
    seed: u64,
    tolerance: f64,
    pass: *mut bool,
    max_rel_err: *mut f64,
    report_json: *mut *mut c_char,
) -> QfStatus {
    guard(|| {
        let d = diagram(d)?;
        if pass.is_null() || max_rel_err.is_null() {
            return Err(Failure::new(QfStatus::NullPointer, "null output pointer"));
        }
        if trials == 0 || !(tolerance > 0.0) {
            return Err(Failure::new(QfStatus::InvalidArgument, "trials must be ≥ 1 and tolerance > 0"));
        }
        let opts = CheckOptions { tolerance, ..CheckOptions::default() };
        let report = equivalence_check(d, trials, seed, &opts);
        *pass = report.pass;
        *max_rel_err = report.max_rel_err;
        if !report_json.is_null() {
            hand_out(report_json, to_json(&report)?)?;
        }
        Ok(())
    })
}

/// Canonical forms of all components as a JSON array in `*out`. With
/// `random_v`, internal spaces are re-homed through unitaries drawn from
/// `seed`.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_canon_json(
    d: *const QfDiagram,
    random_v: bool,
    seed: u64,
    out: *mut *mut c_char,
) -> QfStatus {
    guard(|| {
        let d = diagram(d)?;
        let topo = Topology::build(d);
        let vmode = if random_v { VMode::Random(seed) } else { VMode::Identity };
        let mut forms = Vec::new();
        for c in topo.components().iter().filter(|c| c.class != ComponentClass::Freeline) {
            let form = unravel_component(&topo, c.index, vmode)
                .and_then(|cf| Ok((cf.to_json()?, canonical_dsl(&cf)?)));
            forms.push(match form {
                Ok((mut v, dsl)) => {
                    v["dsl"] = dsl.into();
                    v
                }
                Err(e) => serde_json::json!({ "component": c.index, "class": c.class, "error": e.to_string() }),
            });
        }
        hand_out(out, to_json(&forms)?)
    })
}

/// Renders the diagram: `style` 0 for DOT, 1 for an ASCII grid.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_render(d: *const QfDiagram, style: u32, out: *mut *mut c_char) -> QfStatus {
    guard(|| {
        let d = diagram(d)?;
        let style = match style {
            0 => RenderStyle::Dot,
            1 => RenderStyle::Ascii,
            s => return Err(Failure::new(QfStatus::InvalidArgument, format!("unknown style {s}"))),
        };
        hand_out(out, render(d, style))
    })
}

/// Teleports a random qudit of dimension `dim` (seeded) through every
/// measurement branch; the report is written to `*out` as JSON.
///
/// # Safety
/// `pass` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qf_teleport_demo(dim: usize, seed: u64, pass: *mut bool, out: *mut *mut c_char) -> QfStatus {
    guard(|| {
        if pass.is_null() {
            return Err(Failure::new(QfStatus::NullPointer, "null output pointer"));
        }
        if dim < 2 {
            return Err(Failure::new(QfStatus::InvalidArgument, "dimension must be at least 2"));
        }
        let phi = random_state(vec![WireDecl::new(1, dim)], seed).map_err(|e| Failure::new(QfStatus::InvalidArgument, e))?;
        let report = teleport_demo(&phi, dim).map_err(|e| Failure::new(QfStatus::EvalError, e))?;
        *pass = report.pass;
        hand_out(out, to_json(&report)?)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn qf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
