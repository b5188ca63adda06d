//! C ABI for klab.
//!
//! Groups and reports are opaque handles created and freed here. Every
//! function returns a `KlabStatus`; on failure a message is available from
//! `klab_last_error` until the next call on the same thread. Strings
//! returned to the caller are freed with `klab_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use klab::census::Bucket;
use klab::dynamics::GroupSpec;
use klab::group::{classify, ElementKind, GroupElement};
use klab::linalg::{c, Matrix3};
use klab::report::{run, to_json, Expected, RunConfig, RunReport};
use klab::{gallery, spec_io, KlabError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    BadParameters = 3,
    Singular = 4,
    Numerical = 5,
    CapExceeded = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlabKind {
    Elliptic = 0,
    Parabolic = 1,
    Loxodromic = 2,
}

/// Opaque group handle.
pub struct KlabGroup {
    spec: GroupSpec,
    expected: Option<Expected>,
    radius: usize,
}

/// Opaque report handle.
pub struct KlabReport {
    report: RunReport,
}

/// Bucket value for "infinitely many".
pub const KLAB_INFINITE: i32 = -1;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let s = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &KlabError) -> KlabStatus {
    match e {
        KlabError::BadParameters(_) => KlabStatus::BadParameters,
        KlabError::SingularMatrix(_) | KlabError::ZeroMatrix => KlabStatus::Singular,
        KlabError::CapExceeded { .. } => KlabStatus::CapExceeded,
        KlabError::Io(_) => KlabStatus::Io,
        KlabError::IllConditioned(_)
        | KlabError::EllipticUnsupported
        | KlabError::IdentityElement
        | KlabError::InKernel => KlabStatus::Numerical,
        _ => KlabStatus::InvalidInput,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F>(f: F) -> KlabStatus
where
    F: FnOnce() -> Result<(), (KlabStatus, String)>,
{
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KlabStatus::Panic
        }
    }
}

fn fail(e: KlabError) -> (KlabStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (KlabStatus, String) {
    (KlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (KlabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (KlabStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn bucket_code(b: &str) -> i32 {
    match Bucket::parse(b) {
        Some(Bucket::Zero) => 0,
        Some(Bucket::Finite(n)) => n as i32,
        _ => KLAB_INFINITE,
    }
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next klab call on this thread.
#[no_mangle]
pub extern "C" fn klab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a group spec from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_group_from_json(
    json: *const c_char,
    out: *mut *mut KlabGroup,
) -> KlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let spec = spec_io::parse_group(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(KlabGroup {
            spec,
            expected: None,
            radius: 10,
        }));
        Ok(())
    })
}

/// Builds a gallery example, with its stated buckets as expectations.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_gallery_group(
    id: *const c_char,
    out: *mut *mut KlabGroup,
) -> KlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let id = read_str(id, "id")?;
        let entry = gallery::build(id).map_err(fail)?;
        *out = Box::into_raw(Box::new(KlabGroup {
            expected: Some(Expected::from(&entry)),
            radius: entry.radius,
            spec: entry.spec,
        }));
        Ok(())
    })
}

/// Number of generators of a group.
///
/// # Safety
/// `group` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_group_generator_count(
    group: *const KlabGroup,
    out: *mut usize,
) -> KlabStatus {
    guard(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.spec.generators.len();
        Ok(())
    })
}

/// Serializes a group spec; free the string with `klab_string_free`.
///
/// # Safety
/// `group` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_group_to_json(
    group: *const KlabGroup,
    out: *mut *mut c_char,
) -> KlabStatus {
    guard(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(spec_io::group_to_json(&g.spec))
            .map_err(|_| (KlabStatus::InvalidInput, "interior NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `group` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn klab_group_free(group: *mut KlabGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Runs all estimators. `radius` 0 selects the group's default (10, or
/// the gallery entry's radius).
///
/// # Safety
/// `group` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_run(
    group: *const KlabGroup,
    radius: u32,
    out: *mut *mut KlabReport,
) -> KlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        let cfg = RunConfig {
            radius: if radius == 0 {
                g.radius
            } else {
                radius as usize
            },
            ..RunConfig::default()
        };
        let report = run(&g.spec, g.expected.clone(), &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(KlabReport { report }));
        Ok(())
    })
}

/// Census buckets of a report: counts, 0, or `KLAB_INFINITE`.
///
/// # Safety
/// `report` must come from this library; `li` and `lig` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_report_buckets(
    report: *const KlabReport,
    li: *mut i32,
    lig: *mut i32,
) -> KlabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if li.is_null() || lig.is_null() {
            return Err(null("li/lig"));
        }
        *li = bucket_code(&r.report.census.li);
        *lig = bucket_code(&r.report.census.lig);
        Ok(())
    })
}

/// Counts of detected Λ lines and census vertices.
///
/// # Safety
/// `report` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_report_counts(
    report: *const KlabReport,
    lines: *mut usize,
    vertices: *mut usize,
) -> KlabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if lines.is_null() || vertices.is_null() {
            return Err(null("lines/vertices"));
        }
        *lines = r.report.lambda.lines.len();
        *vertices = r.report.census.vertices.len();
        Ok(())
    })
}

/// Verdict against expectations: 0 pass or none given, 1 mismatch,
/// 3 ambiguous (the CLI exit codes).
///
/// # Safety
/// `report` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_report_outcome(
    report: *const KlabReport,
    out: *mut i32,
) -> KlabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = r.report.outcome.exit_code();
        Ok(())
    })
}

/// The full report as JSON; free the string with `klab_string_free`.
///
/// # Safety
/// `report` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn klab_report_json(
    report: *const KlabReport,
    out: *mut *mut c_char,
) -> KlabStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(to_json(&r.report))
            .map_err(|_| (KlabStatus::InvalidInput, "interior NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn klab_report_free(report: *mut KlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Classifies the projective map of a 3×3 matrix given as 18 doubles,
/// (re, im) pairs in row-major order. `moduli` receives the eigenvalue
/// moduli of the unit-determinant lift, ascending.
///
/// # Safety
/// `entries` must point to 18 doubles, `moduli` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn klab_classify(
    entries: *const f64,
    kind: *mut KlabKind,
    diagonalizable: *mut bool,
    moduli: *mut f64,
) -> KlabStatus {
    guard(|| {
        if entries.is_null() || kind.is_null() || diagonalizable.is_null() || moduli.is_null() {
            return Err(null("argument"));
        }
        let e = std::slice::from_raw_parts(entries, 18);
        let mut m = Matrix3::zero();
        for i in 0..9 {
            m.0[i / 3][i % 3] = c(e[2 * i], e[2 * i + 1]);
        }
        let g = GroupElement::new(m).map_err(fail)?;
        let class = classify(&g);
        *kind = match class.kind {
            ElementKind::Elliptic => KlabKind::Elliptic,
            ElementKind::Parabolic => KlabKind::Parabolic,
            ElementKind::Loxodromic => KlabKind::Loxodromic,
        };
        *diagonalizable = class.diagonalizable;
        std::slice::from_raw_parts_mut(moduli, 3).copy_from_slice(&class.moduli);
        Ok(())
    })
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn klab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
