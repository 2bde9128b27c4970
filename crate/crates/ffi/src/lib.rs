//! C interface to surfcalc.
//!
//! Every function returns an `int32_t` status (`SC_OK` on success) and writes
//! results through out-pointers. Objects are opaque handles released with
//! their `*_free` function. After a failure, `sc_last_error` copies the
//! message of the most recent error on the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use surfcalc_core::geometry::{DerivativeMode, Geometry, SurfaceConfig};
use surfcalc_core::grid::StencilOrder;
use surfcalc_core::quadrature::{surface_integral, InteriorRule, QuadratureRule};
use surfcalc_core::scenario::{run_with_threads, RunReport, Scenario};
use surfcalc_core::Error;

pub const SC_OK: i32 = 0;
/// A required pointer argument was null.
pub const SC_ERR_NULL: i32 = 1;
/// Invalid configuration or argument.
pub const SC_ERR_CONFIG: i32 = 2;
/// Degenerate geometry or a point outside the domain or time window.
pub const SC_ERR_GEOMETRY: i32 = 3;
/// Stability bound exceeded, positivity lost or a difference quotient lost to cancellation.
pub const SC_ERR_NUMERIC: i32 = 4;
pub const SC_ERR_IO: i32 = 5;
/// A string argument was not valid UTF-8.
pub const SC_ERR_UTF8: i32 = 6;
/// An index or buffer length was out of range.
pub const SC_ERR_RANGE: i32 = 7;
/// Internal failure; the handle arguments are left untouched.
pub const SC_ERR_PANIC: i32 = 8;

/// `derivative_mode` value selecting closed-form flow-map jets.
pub const SC_MODE_ANALYTIC: i32 = 0;
/// `derivative_mode` value selecting finite differences of sampled positions.
pub const SC_MODE_FINITE_DIFFERENCE: i32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::ShapeMismatch(_) | Error::InsufficientTimeLevels { .. } => SC_ERR_CONFIG,
        Error::SingularMetric { .. }
        | Error::CornerNode { .. }
        | Error::NotOnBoundary { .. }
        | Error::DegenerateSegment { .. }
        | Error::OutsideDomain { .. }
        | Error::OutsideTimeWindow { .. }
        | Error::InvalidDomain(_) => SC_ERR_GEOMETRY,
        Error::CflViolation { .. }
        | Error::NonpositiveDensity { .. }
        | Error::NonpositiveThermo { .. }
        | Error::StepTooSmall { .. } => SC_ERR_NUMERIC,
        Error::Io(_) => SC_ERR_IO,
    }
}

struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(code_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SC_OK,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            SC_ERR_PANIC
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(SC_ERR_NULL, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SC_ERR_UTF8, format!("`{what}` is not valid UTF-8")))
}

/// Copies `s` with a terminating NUL into `buf` if it fits; always reports the
/// needed size (including the NUL) through `needed` when non-null.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() {
        return Ok(());
    }
    if len < s.len() + 1 {
        return Err(Fail(SC_ERR_RANGE, format!("buffer of {len} bytes, need {}", s.len() + 1)));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread; see `copy_out` conventions:
/// `buf` may be null to query the size through `needed`.
#[no_mangle]
pub unsafe extern "C" fn sc_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> i32 {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_out(&msg, buf, len, needed) {
        Ok(()) => SC_OK,
        Err(Fail(code, _)) => code,
    }
}

/// A parsed and validated scenario.
pub struct ScScenario {
    inner: Scenario,
}

/// The outcome of running a scenario.
pub struct ScReport {
    inner: RunReport,
    /// `(suite, check)` of every verdict in report order.
    names: Vec<(String, String)>,
}

/// Surface geometry sampled on a grid at one time.
pub struct ScGeometry {
    inner: Geometry,
    rule: QuadratureRule,
}

/// Verdict on one check over the resolutions of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ScCheckSummary {
    pub resolutions: u32,
    pub finest_rel_residual: f64,
    /// Smallest observed order; NaN when no order was measured.
    pub min_order: f64,
    /// 1 if every refinement step hit the roundoff floor.
    pub exact: i32,
    /// 1 if the check met its tolerance.
    pub pass: i32,
}

/// Parses scenario JSON. On success `*out` owns a new handle.
#[no_mangle]
pub unsafe extern "C" fn sc_scenario_from_json(json: *const c_char, out: *mut *mut ScScenario) -> i32 {
    guard(|| {
        non_null(out, "out")?;
        let text = str_arg(json, "json")?;
        let inner = Scenario::from_json(text)?;
        *out = Box::into_raw(Box::new(ScScenario { inner }));
        Ok(())
    })
}

/// Releases a scenario; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sc_scenario_free(sc: *mut ScScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Runs every selected suite; `threads == 0` uses the global pool.
#[no_mangle]
pub unsafe extern "C" fn sc_scenario_run(sc: *const ScScenario, threads: u32, out: *mut *mut ScReport) -> i32 {
    guard(|| {
        non_null(sc, "scenario")?;
        non_null(out, "out")?;
        let t = (threads > 0).then_some(threads as usize);
        let inner = run_with_threads(&(*sc).inner, t)?;
        let names = inner
            .verdicts()
            .map(|(s, v)| (s.name().to_string(), v.summary.name.clone()))
            .collect();
        *out = Box::into_raw(Box::new(ScReport { inner, names }));
        Ok(())
    })
}

/// Releases a report; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sc_report_free(r: *mut ScReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// `*passed` is 1 if every check met its tolerance, else 0.
#[no_mangle]
pub unsafe extern "C" fn sc_report_passed(r: *const ScReport, passed: *mut i32) -> i32 {
    guard(|| {
        non_null(r, "report")?;
        non_null(passed, "passed")?;
        *passed = (*r).inner.passed() as i32;
        Ok(())
    })
}

/// Number of checks with a verdict.
#[no_mangle]
pub unsafe extern "C" fn sc_report_check_count(r: *const ScReport, count: *mut usize) -> i32 {
    guard(|| {
        non_null(r, "report")?;
        non_null(count, "count")?;
        *count = (*r).names.len();
        Ok(())
    })
}

fn verdict(r: &ScReport, index: usize) -> Result<&surfcalc_core::scenario::Verdict, Fail> {
    r.inner
        .verdicts()
        .nth(index)
        .map(|(_, v)| v)
        .ok_or_else(|| Fail(SC_ERR_RANGE, format!("check index {index} of {}", r.names.len())))
}

#[no_mangle]
pub unsafe extern "C" fn sc_report_check(r: *const ScReport, index: usize, out: *mut ScCheckSummary) -> i32 {
    guard(|| {
        non_null(r, "report")?;
        non_null(out, "out")?;
        let v = verdict(&*r, index)?;
        *out = ScCheckSummary {
            resolutions: v.summary.resolutions as u32,
            finest_rel_residual: v.summary.finest_rel_residual,
            min_order: v.summary.min_order.unwrap_or(f64::NAN),
            exact: v.summary.exact as i32,
            pass: v.pass as i32,
        };
        Ok(())
    })
}

/// Copies `suite/check` of the check at `index`.
#[no_mangle]
pub unsafe extern "C" fn sc_report_check_name(
    r: *const ScReport,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> i32 {
    guard(|| {
        non_null(r, "report")?;
        let names = &(&*r).names;
        let (suite, check) = names
            .get(index)
            .ok_or_else(|| Fail(SC_ERR_RANGE, format!("check index {index} of {}", names.len())))?;
        copy_out(&format!("{suite}/{check}"), buf, len, needed)
    })
}

/// Writes all report files into the directory `dir`.
#[no_mangle]
pub unsafe extern "C" fn sc_report_write(r: *const ScReport, dir: *const c_char) -> i32 {
    guard(|| {
        non_null(r, "report")?;
        let d = str_arg(dir, "dir")?;
        (*r).inner.write(Path::new(d))?;
        Ok(())
    })
}

/// Builds the geometry of a surface (JSON of one catalog entry) on an
/// `n1 × n2` grid at time `t` with second-order stencils and trapezoid weights.
#[no_mangle]
pub unsafe extern "C" fn sc_geometry_new(
    surface_json: *const c_char,
    n1: u32,
    n2: u32,
    t: f64,
    derivative_mode: i32,
    out: *mut *mut ScGeometry,
) -> i32 {
    guard(|| {
        non_null(out, "out")?;
        let text = str_arg(surface_json, "surface_json")?;
        let cfg: SurfaceConfig =
            serde_json::from_str(text).map_err(|e| Fail(SC_ERR_CONFIG, format!("surface: {e}")))?;
        let mode = match derivative_mode {
            SC_MODE_ANALYTIC => DerivativeMode::Analytic,
            SC_MODE_FINITE_DIFFERENCE => DerivativeMode::FiniteDifference,
            m => return Err(Fail(SC_ERR_CONFIG, format!("unknown derivative mode {m}"))),
        };
        let spec = cfg.build()?;
        let grid = spec.domain.grid(n1 as usize, n2 as usize, StencilOrder::Second)?;
        let inner = Geometry::build(&spec, &grid, t, mode)?;
        let rule = QuadratureRule::new(&grid, InteriorRule::Trapezoid)?;
        *out = Box::into_raw(Box::new(ScGeometry { inner, rule }));
        Ok(())
    })
}

/// Releases a geometry; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sc_geometry_free(g: *mut ScGeometry) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of grid nodes.
#[no_mangle]
pub unsafe extern "C" fn sc_geometry_len(g: *const ScGeometry, len: *mut usize) -> i32 {
    guard(|| {
        non_null(g, "geometry")?;
        non_null(len, "len")?;
        *len = (*g).inner.len();
        Ok(())
    })
}

unsafe fn fill(out: *mut f64, len: usize, values: impl ExactSizeIterator<Item = f64>) -> Result<(), Fail> {
    non_null(out, "out")?;
    if len != values.len() {
        return Err(Fail(SC_ERR_RANGE, format!("buffer of {len} values, need {}", values.len())));
    }
    for (k, v) in values.enumerate() {
        *out.add(k) = v;
    }
    Ok(())
}

/// Node positions as `x, y, z` triples; `len` must be three times the node count.
#[no_mangle]
pub unsafe extern "C" fn sc_geometry_positions(g: *const ScGeometry, out: *mut f64, len: usize) -> i32 {
    guard(|| {
        non_null(g, "geometry")?;
        let pos = &(*g).inner.pos;
        fill(out, len, pos.iter().flatten().copied().collect::<Vec<_>>().into_iter())
    })
}

/// Mean curvature at every node.
#[no_mangle]
pub unsafe extern "C" fn sc_geometry_mean_curvature(g: *const ScGeometry, out: *mut f64, len: usize) -> i32 {
    guard(|| {
        non_null(g, "geometry")?;
        fill(out, len, (*g).inner.metric.iter().map(|m| m.h))
    })
}

/// Area element `√G` at every node.
#[no_mangle]
pub unsafe extern "C" fn sc_geometry_sqrt_g(g: *const ScGeometry, out: *mut f64, len: usize) -> i32 {
    guard(|| {
        non_null(g, "geometry")?;
        fill(out, len, (*g).inner.sqrt_g.iter().copied())
    })
}

/// `∫ f dH²` for node values `f`.
#[no_mangle]
pub unsafe extern "C" fn sc_surface_integral(g: *const ScGeometry, f: *const f64, len: usize, out: *mut f64) -> i32 {
    guard(|| {
        non_null(g, "geometry")?;
        non_null(f, "f")?;
        non_null(out, "out")?;
        let geo = &(*g).inner;
        if len != geo.len() {
            return Err(Fail(SC_ERR_RANGE, format!("{len} values for {} nodes", geo.len())));
        }
        let values = std::slice::from_raw_parts(f, len);
        *out = surface_integral(values, geo, &(*g).rule);
        Ok(())
    })
}
