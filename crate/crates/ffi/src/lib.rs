//! C ABI over `mfe-core`.
//!
//! Objects are opaque handles created by `hmfe_*_new`-style functions and
//! released with the matching `*_free`. Every fallible function returns an
//! [`HmfeStatus`]; on failure `hmfe_last_error` describes the problem until
//! the next call on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mfe_core::algebra::rational;
use mfe_core::mfe::{construct_solution, Chart, ConstructionReport, CurveSpec, MetricSpec};
use mfe_core::ode::{detect_polynomial, DetectionReport, DetectionStatus, OdeData, PolyDetection};
use mfe_core::verify::{mass_check, mfe_residual_grid, GridSpec};
use mfe_core::{algebra::UniPoly, Error};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmfeStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Precondition = 3,
    /// No polynomial solution or no admissible root.
    NotFound = 4,
    /// The point is a Weierstrass point.
    Singularity = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmfeChart {
    C0 = 0,
    C0Prime = 1,
}

/// Result of polynomial detection for data `S`.
pub struct HmfeDetection {
    inner: PolyDetection,
}

/// A constructed solution together with its construction report.
pub struct HmfeSolution {
    report: ConstructionReport,
}

/// Hyperelliptic curve given by its branch points.
pub struct HmfeCurve {
    inner: CurveSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> HmfeStatus {
    match e {
        Error::Parse(_) => HmfeStatus::Parse,
        Error::AtSingularity(_) | Error::SingularityInGrid(..) => HmfeStatus::Singularity,
        _ => HmfeStatus::Precondition,
    }
}

fn fail(status: HmfeStatus, msg: impl Into<String>) -> HmfeStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> HmfeStatus {
    fail(status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> HmfeStatus) -> HmfeStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HmfeStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, HmfeStatus> {
    if p.is_null() {
        return Err(fail(HmfeStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HmfeStatus::Parse, "string is not UTF-8"))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! need {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(HmfeStatus::NullPointer, concat!("null argument: ", stringify!($p)));
        })+
    };
}

/// Copies `text` plus a terminating NUL into `buf`. `*needed` always
/// receives the required size including the NUL.
unsafe fn write_text(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> HmfeStatus {
    let bytes = text.as_bytes();
    if !needed.is_null() {
        *needed = bytes.len() + 1;
    }
    if buf.is_null() || cap < bytes.len() + 1 {
        return fail(HmfeStatus::BufferTooSmall, format!("{} bytes needed", bytes.len() + 1));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
    *buf.add(bytes.len()) = 0;
    HmfeStatus::Ok
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn hmfe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hmfe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Detects polynomial solutions for data `S` given as comma separated
/// rationals in ascending order, e.g. `"1,1"`. A detection without a
/// solution still succeeds; query it with `hmfe_detection_found`.
///
/// # Safety
/// `data` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hmfe_detect(data: *const c_char, out: *mut *mut HmfeDetection) -> HmfeStatus {
    guard(|| {
        need!(out);
        *out = ptr::null_mut();
        let text = try_status!(read_str(data));
        let coeffs = try_status!(rational::parse_list(text).map_err(from_error));
        let det = try_status!(detect_polynomial(&OdeData::new(UniPoly::new(coeffs))).map_err(from_error));
        *out = Box::into_raw(Box::new(HmfeDetection { inner: det }));
        HmfeStatus::Ok
    })
}

/// Writes 1 to `found` when a polynomial solution was certified, 0 otherwise.
///
/// # Safety
/// `det` must come from `hmfe_detect`; `found` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_detection_found(det: *const HmfeDetection, found: *mut i32) -> HmfeStatus {
    guard(|| {
        need!(det, found);
        *found = i32::from((*det).inner.status == DetectionStatus::PolynomialFound);
        HmfeStatus::Ok
    })
}

/// Smallest certified root `a = 1/Q(0)` as a double.
///
/// # Safety
/// `det` must come from `hmfe_detect`; `a` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_detection_root(det: *const HmfeDetection, a: *mut f64) -> HmfeStatus {
    guard(|| {
        need!(det, a);
        match (*det).inner.root_a() {
            Some(r) => {
                *a = r.to_f64();
                HmfeStatus::Ok
            }
            None => fail(HmfeStatus::NotFound, "no polynomial solution"),
        }
    })
}

/// JSON report of the detection, NUL-terminated. `*needed` receives the
/// required size; `BufferTooSmall` is returned when `cap` is below it.
///
/// # Safety
/// `det` must come from `hmfe_detect`; `buf` must hold `cap` bytes or be NULL.
#[no_mangle]
pub unsafe extern "C" fn hmfe_detection_json(
    det: *const HmfeDetection,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> HmfeStatus {
    guard(|| {
        need!(det);
        let report = DetectionReport::from(&(*det).inner);
        let text = try_status!(serde_json::to_string(&report).map_err(|e| fail(HmfeStatus::Precondition, e.to_string())));
        write_text(&text, buf, cap, needed)
    })
}

/// # Safety
/// `det` must come from `hmfe_detect` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hmfe_detection_free(det: *mut HmfeDetection) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Constructs the solution for weights `λ_1..λ_g` given as comma separated
/// rationals. Returns `NotFound` when no admissible root exists.
///
/// # Safety
/// `lambdas` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hmfe_construct(lambdas: *const c_char, out: *mut *mut HmfeSolution) -> HmfeStatus {
    guard(|| {
        need!(out);
        *out = ptr::null_mut();
        let text = try_status!(read_str(lambdas));
        let values = try_status!(rational::parse_list(text).map_err(from_error));
        let metric = try_status!(MetricSpec::new(values).map_err(from_error));
        let report = try_status!(construct_solution(&metric).map_err(from_error));
        if report.solution.is_none() {
            return fail(HmfeStatus::NotFound, "no admissible root for this metric");
        }
        *out = Box::into_raw(Box::new(HmfeSolution { report }));
        HmfeStatus::Ok
    })
}

fn solution_ref(sol: &HmfeSolution) -> &mfe_core::mfe::MfeSolution {
    sol.report.solution.as_ref().expect("handles only wrap solved constructions")
}

/// Genus of the solution's curve.
///
/// # Safety
/// `sol` must come from `hmfe_construct`; `genus` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_solution_genus(sol: *const HmfeSolution, genus: *mut usize) -> HmfeStatus {
    guard(|| {
        need!(sol, genus);
        *genus = solution_ref(&*sol).genus;
        HmfeStatus::Ok
    })
}

/// The admissible root `a`.
///
/// # Safety
/// `sol` must come from `hmfe_construct`; `a` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_solution_a(sol: *const HmfeSolution, a: *mut f64) -> HmfeStatus {
    guard(|| {
        need!(sol, a);
        *a = solution_ref(&*sol).root.to_f64();
        HmfeStatus::Ok
    })
}

/// Coefficients of `u` in powers of `xy`. `*len` receives the count; the
/// call fails with `BufferTooSmall` when `cap` is below it.
///
/// # Safety
/// `sol` must come from `hmfe_construct`; `coeffs` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn hmfe_solution_u(
    sol: *const HmfeSolution,
    coeffs: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HmfeStatus {
    guard(|| {
        need!(sol, len);
        let u = &solution_ref(&*sol).closed_form.u;
        *len = u.len();
        if coeffs.is_null() || cap < u.len() {
            return fail(HmfeStatus::BufferTooSmall, format!("{} coefficients", u.len()));
        }
        ptr::copy_nonoverlapping(u.as_ptr(), coeffs, u.len());
        HmfeStatus::Ok
    })
}

/// JSON construction report, with the same buffer protocol as
/// `hmfe_detection_json`.
///
/// # Safety
/// `sol` must come from `hmfe_construct`; `buf` must hold `cap` bytes or be NULL.
#[no_mangle]
pub unsafe extern "C" fn hmfe_solution_json(
    sol: *const HmfeSolution,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> HmfeStatus {
    guard(|| {
        need!(sol);
        let text = try_status!(
            serde_json::to_string(&(*sol).report).map_err(|e| fail(HmfeStatus::Precondition, e.to_string()))
        );
        write_text(&text, buf, cap, needed)
    })
}

/// # Safety
/// `sol` must come from `hmfe_construct` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hmfe_solution_free(sol: *mut HmfeSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Curve from `n` branch points stored as interleaved `re, im` pairs.
///
/// # Safety
/// `re_im` must hold `2 n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_curve_new(re_im: *const f64, n: usize, out: *mut *mut HmfeCurve) -> HmfeStatus {
    guard(|| {
        need!(re_im, out);
        *out = ptr::null_mut();
        let flat = std::slice::from_raw_parts(re_im, 2 * n);
        let roots: Vec<Complex64> = flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let curve = try_status!(CurveSpec::from_roots(&roots).map_err(from_error));
        *out = Box::into_raw(Box::new(HmfeCurve { inner: curve }));
        HmfeStatus::Ok
    })
}

/// Curve whose branch points are the `n` roots of unity scaled by `radius`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_curve_roots_of_unity(n: usize, radius: f64, out: *mut *mut HmfeCurve) -> HmfeStatus {
    guard(|| {
        need!(out);
        *out = ptr::null_mut();
        if !(radius.is_finite() && radius > 0.0) {
            return fail(HmfeStatus::Precondition, "radius must be positive");
        }
        let curve = try_status!(CurveSpec::roots_of_unity(n, radius).map_err(from_error));
        *out = Box::into_raw(Box::new(HmfeCurve { inner: curve }));
        HmfeStatus::Ok
    })
}

/// # Safety
/// `curve` must come from a curve constructor; `genus` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_curve_genus(curve: *const HmfeCurve, genus: *mut usize) -> HmfeStatus {
    guard(|| {
        need!(curve, genus);
        *genus = (*curve).inner.genus();
        HmfeStatus::Ok
    })
}

/// # Safety
/// `curve` must come from a curve constructor and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hmfe_curve_free(curve: *mut HmfeCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

fn chart(id: i32) -> Result<Chart, HmfeStatus> {
    match id {
        x if x == HmfeChart::C0 as i32 => Ok(Chart::C0),
        x if x == HmfeChart::C0Prime as i32 => Ok(Chart::C0Prime),
        _ => Err(fail(HmfeStatus::Precondition, format!("unknown chart {id}"))),
    }
}

unsafe fn matched<'a>(
    sol: *const HmfeSolution,
    curve: *const HmfeCurve,
) -> Result<(&'a mfe_core::mfe::MfeSolution, &'a CurveSpec), HmfeStatus> {
    let s = solution_ref(&*sol);
    let c = &(*curve).inner;
    if s.genus != c.genus() {
        return Err(fail(
            HmfeStatus::Precondition,
            format!("solution genus {} does not match curve genus {}", s.genus, c.genus()),
        ));
    }
    Ok((s, c))
}

/// `φ = e^ψ` at `re + i·im` in the chart `chart_id` (an `HmfeChart` value).
///
/// # Safety
/// Handles must be valid; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_phi(
    sol: *const HmfeSolution,
    curve: *const HmfeCurve,
    chart_id: i32,
    re: f64,
    im: f64,
    value: *mut f64,
) -> HmfeStatus {
    guard(|| {
        need!(sol, curve, value);
        let (s, c) = try_status!(matched(sol, curve));
        *value = s.phi(c, try_status!(chart(chart_id)), Complex64::new(re, im));
        HmfeStatus::Ok
    })
}

/// `ψ` at `re + i·im`; `Singularity` at Weierstrass points.
///
/// # Safety
/// Handles must be valid; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_psi(
    sol: *const HmfeSolution,
    curve: *const HmfeCurve,
    chart_id: i32,
    re: f64,
    im: f64,
    value: *mut f64,
) -> HmfeStatus {
    guard(|| {
        need!(sol, curve, value);
        let (s, c) = try_status!(matched(sol, curve));
        *value = try_status!(s.psi(c, try_status!(chart(chart_id)), Complex64::new(re, im)).map_err(from_error));
        HmfeStatus::Ok
    })
}

/// Numerical total mass and its expected value `8π(g + 1)`.
///
/// # Safety
/// Handles must be valid; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_mass(
    sol: *const HmfeSolution,
    curve: *const HmfeCurve,
    resolution: usize,
    estimate: *mut f64,
    expected: *mut f64,
) -> HmfeStatus {
    guard(|| {
        need!(sol, curve, estimate, expected);
        let (s, c) = try_status!(matched(sol, curve));
        let m = try_status!(mass_check(&s.closed_form, c, resolution).map_err(from_error));
        *estimate = m.mass_estimate;
        *expected = m.mass_expected;
        HmfeStatus::Ok
    })
}

/// Maximal finite-difference residual relative to `max φ` on a square grid
/// of chart `C0` centred at the origin, with the default exclusion radius.
///
/// # Safety
/// Handles must be valid; `max_rel` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hmfe_residual_max(
    sol: *const HmfeSolution,
    curve: *const HmfeCurve,
    half_width: f64,
    resolution: usize,
    fd_step: f64,
    max_rel: *mut f64,
) -> HmfeStatus {
    guard(|| {
        need!(sol, curve, max_rel);
        let (s, c) = try_status!(matched(sol, curve));
        let mut grid = try_status!(
            GridSpec::for_curve(c, Chart::C0, Complex64::new(0.0, 0.0), half_width, resolution).map_err(from_error)
        );
        grid.fd_step = fd_step;
        grid.exclusion_radius = mfe_core::verify::default_exclusion(c, Chart::C0, fd_step);
        let (rep, _) = try_status!(mfe_residual_grid(&s.closed_form, c, &grid).map_err(from_error));
        *max_rel = rep.max_rel_residual;
        HmfeStatus::Ok
    })
}
