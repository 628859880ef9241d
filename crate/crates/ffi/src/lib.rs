//! C ABI for `sos-core`.
//!
//! Every fallible call returns an [`SosStatus`]; on failure the message is
//! available from [`sos_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `*_free` function. Strings
//! returned to the caller are owned by the caller and released with
//! [`sos_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sos_core::analysis::{
    analytic_denial_probability, enumerate_denial_oracle, montecarlo_denial, LayerModel, RoleSets, ScenarioParams,
};
use sos_core::harness::{emit_results, run_mode, Mode, OutputFormat, RunResult, ScenarioConfig};
use sos_core::ring::{hash_to_ring, NodeRecord, Overlay};
use sos_core::{seed, Address, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SosStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    NotFound = 4,
    Conflict = 5,
    TooLarge = 6,
    Infeasible = 7,
    Unsupported = 8,
    Io = 9,
    Panic = 10,
}

impl From<&Error> for SosStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::OverlayEmpty | Error::Serialize(_) => SosStatus::InvalidArgument,
            Error::Config { .. } | Error::Constraint { .. } => SosStatus::Config,
            Error::NotFound(_) => SosStatus::NotFound,
            Error::Conflict(_) => SosStatus::Conflict,
            Error::TooLarge { .. } => SosStatus::TooLarge,
            Error::Infeasible(_) => SosStatus::Infeasible,
            Error::Unsupported(_) => SosStatus::Unsupported,
            Error::Io { .. } => SosStatus::Io,
        }
    }
}

/// Denial-scenario parameters, mirroring `ScenarioParams`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SosScenario {
    pub nodes: usize,
    pub soaps_per_user: usize,
    pub beacons: usize,
    pub servlets: usize,
    pub attacked: usize,
    pub disjoint: bool,
    /// When false the beacon layer is not counted.
    pub count_beacons: bool,
}

impl SosScenario {
    fn split(&self) -> (ScenarioParams, LayerModel) {
        let params = ScenarioParams {
            nodes: self.nodes,
            soaps_per_user: self.soaps_per_user,
            beacons: self.beacons,
            servlets: self.servlets,
            attacked: self.attacked,
            disjoint: self.disjoint,
        };
        let model = if self.count_beacons {
            LayerModel::Three
        } else {
            LayerModel::Two
        };
        (params, model)
    }
}

/// Opaque Chord overlay.
pub struct SosOverlay {
    inner: Overlay,
}

/// Opaque result of one harness run.
pub struct SosRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), (SosStatus, String)>) -> SosStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SosStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside sos-core".into());
            SosStatus::Panic
        }
    }
}

fn fail(e: Error) -> (SosStatus, String) {
    (SosStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (SosStatus, String) {
    (SosStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SosStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SosStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SosStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null if none.
/// Release with [`sos_string_free`].
#[no_mangle]
pub extern "C" fn sos_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map(owned_string).unwrap_or(ptr::null_mut()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sos_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sos_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Closed-form denial probability. Requires disjoint layers.
///
/// # Safety
/// `scenario` and `out_probability` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sos_analytic_denial(scenario: *const SosScenario, out_probability: *mut f64) -> SosStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let dst = out(out_probability, "out_probability")?;
        let (p, model) = s.split();
        *dst = analytic_denial_probability(&p, model).map_err(fail)?;
        Ok(())
    })
}

/// Exact denial probability by enumerating every attacked set, using the
/// canonical role placement. Fails with `TooLarge` above `cap` subsets.
///
/// # Safety
/// `scenario` and `out_probability` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sos_enumerate_denial(
    scenario: *const SosScenario,
    cap: u64,
    out_probability: *mut f64,
) -> SosStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let dst = out(out_probability, "out_probability")?;
        let (p, model) = s.split();
        *dst = enumerate_denial_oracle(&p, &RoleSets::canonical(&p), model, cap).map_err(fail)?;
        Ok(())
    })
}

/// Monte Carlo estimate with a three-sigma half-width.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sos_montecarlo_denial(
    scenario: *const SosScenario,
    trials: u64,
    seed: u64,
    out_mean: *mut f64,
    out_half_width: *mut f64,
) -> SosStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let mean = out(out_mean, "out_mean")?;
        let half = out(out_half_width, "out_half_width")?;
        let (p, model) = s.split();
        let mut rng = seed::stream(seed, "ffi/montecarlo");
        let est = montecarlo_denial(&p, &RoleSets::canonical(&p), model, trials, &mut rng).map_err(fail)?;
        *mean = est.mean;
        *half = est.half_width;
        Ok(())
    })
}

/// # Safety
/// `out_overlay` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_new(bits: u32, out_overlay: *mut *mut SosOverlay) -> SosStatus {
    guard(|| {
        let dst = out(out_overlay, "out_overlay")?;
        let inner = Overlay::new(bits).map_err(fail)?;
        *dst = Box::into_raw(Box::new(SosOverlay { inner }));
        Ok(())
    })
}

/// # Safety
/// `overlay` must be null or a handle from [`sos_overlay_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_free(overlay: *mut SosOverlay) {
    if !overlay.is_null() {
        drop(Box::from_raw(overlay));
    }
}

/// Adds a node whose identifier is the hash of `address`.
///
/// # Safety
/// `overlay` must be a live handle, `address` a NUL-terminated string and
/// `out_id` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_join(
    overlay: *mut SosOverlay,
    address: *const c_char,
    out_id: *mut u64,
) -> SosStatus {
    guard(|| {
        let o = out(overlay, "overlay")?;
        let address = text(address, "address")?;
        let id = hash_to_ring(address.as_bytes(), o.inner.bits()).map_err(fail)?;
        o.inner.join(NodeRecord::up(id, Address::from(address))).map_err(fail)?;
        if let Some(dst) = out_id.as_mut() {
            *dst = id.value();
        }
        Ok(())
    })
}

/// Adds a node at an explicit identifier.
///
/// # Safety
/// `overlay` must be a live handle and `address` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_join_at(overlay: *mut SosOverlay, address: *const c_char, id: u64) -> SosStatus {
    guard(|| {
        let o = out(overlay, "overlay")?;
        let address = text(address, "address")?;
        let id = o.inner.space().id(id).map_err(fail)?;
        o.inner.join(NodeRecord::up(id, Address::from(address))).map_err(fail)
    })
}

/// # Safety
/// `overlay` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_leave(overlay: *mut SosOverlay, id: u64) -> SosStatus {
    guard(|| {
        let o = out(overlay, "overlay")?;
        let id = o.inner.space().id(id).map_err(fail)?;
        o.inner.leave(id).map(drop).map_err(fail)
    })
}

/// Number of live nodes; 0 for a null handle.
///
/// # Safety
/// `overlay` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_live_count(overlay: *const SosOverlay) -> usize {
    overlay.as_ref().map_or(0, |o| o.inner.live_count())
}

/// Routes `key` from the lowest live node. `out_hops` receives the number
/// of intermediate nodes between the start and the owner.
///
/// # Safety
/// `overlay` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sos_overlay_lookup(
    overlay: *const SosOverlay,
    key: u64,
    out_owner: *mut u64,
    out_hops: *mut usize,
) -> SosStatus {
    guard(|| {
        let o = overlay.as_ref().ok_or_else(|| null("overlay"))?;
        let owner = out(out_owner, "out_owner")?;
        let hops = out(out_hops, "out_hops")?;
        let key = o.inner.space().id(key).map_err(fail)?;
        let lookup = o.inner.lookup(key).map_err(fail)?;
        *owner = lookup.owner.value();
        *hops = lookup.path.len();
        Ok(())
    })
}

/// Runs a scenario given as JSON text. `mode` is one of analytic,
/// enumerate, montecarlo, simulate, compare. `seed` overrides the config
/// seed when `override_seed` is true.
///
/// # Safety
/// `scenario_json` and `mode` must be NUL-terminated strings; `out_run`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn sos_run_scenario(
    scenario_json: *const c_char,
    mode: *const c_char,
    override_seed: bool,
    seed: u64,
    out_run: *mut *mut SosRun,
) -> SosStatus {
    guard(|| {
        let dst = out(out_run, "out_run")?;
        let cfg = ScenarioConfig::from_json(text(scenario_json, "scenario_json")?).map_err(fail)?;
        let mode: Mode = text(mode, "mode")?.parse().map_err(fail)?;
        let inner = run_mode(&cfg, mode, override_seed.then_some(seed)).map_err(fail)?;
        *dst = Box::into_raw(Box::new(SosRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from [`sos_run_scenario`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sos_run_free(run: *mut SosRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Full result as pretty JSON, or null on a null handle.
/// Release with [`sos_string_free`].
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sos_run_result_json(run: *const SosRun) -> *mut c_char {
    let Some(r) = run.as_ref() else {
        set_error("`run` is null".into());
        return ptr::null_mut();
    };
    match serde_json::to_string_pretty(&r.inner) {
        Ok(s) => owned_string(s),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Number of comparison rows; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sos_run_comparison_len(run: *const SosRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.comparison.len())
}

/// One comparison row. Missing estimates are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SosComparisonRow {
    pub nodes: usize,
    pub attacked: usize,
    pub analytic: f64,
    pub enumerated: f64,
    pub mc_mean: f64,
    pub mc_half_width: f64,
    pub pass: bool,
}

/// # Safety
/// `run` must be a live handle and `out_row` valid.
#[no_mangle]
pub unsafe extern "C" fn sos_run_comparison_row(
    run: *const SosRun,
    index: usize,
    out_row: *mut SosComparisonRow,
) -> SosStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let dst = out(out_row, "out_row")?;
        let row = r.inner.comparison.get(index).ok_or_else(|| {
            (
                SosStatus::InvalidArgument,
                format!("row {index} out of range ({} rows)", r.inner.comparison.len()),
            )
        })?;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *dst = SosComparisonRow {
            nodes: row.nodes,
            attacked: row.k,
            analytic: nan(row.analytic),
            enumerated: nan(row.enumerated),
            mc_mean: nan(row.mc_mean),
            mc_half_width: nan(row.mc_halfwidth),
            pass: row.pass,
        };
        Ok(())
    })
}

/// Writes result files into `dir`. `formats` is a comma-separated list of
/// csv, json, dat.
///
/// # Safety
/// `run` must be a live handle; `dir` and `formats` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sos_run_emit(run: *const SosRun, dir: *const c_char, formats: *const c_char) -> SosStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let dir = text(dir, "dir")?;
        let formats = text(formats, "formats")?
            .split(',')
            .map(str::parse::<OutputFormat>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(fail)?;
        emit_results(&r.inner, Path::new(dir), &formats).map(drop).map_err(fail)
    })
}
