//! C ABI for `ptspec`.
//!
//! Conventions:
//! - Operators and sequences are opaque handles created by `*_from_json` or
//!   `ptspec_pt_generate` and released with the matching `*_free`.
//! - Every fallible function returns a [`PtspecStatus`]; on failure the
//!   message is available from [`ptspec_last_error`] on the same thread.
//! - Reports are returned as NUL-terminated JSON strings owned by the
//!   caller and released with [`ptspec_string_free`].
//! - Panics never cross the boundary; they surface as
//!   [`PtspecStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ptspec::verify::{self, Ensemble, StepOptions};
use ptspec::{
    certify_arc_homogeneity, certify_homogeneity, generate_pt_sequence, CircularArcSet, Error, IntervalSet,
    LatticeSpec, PeriodicCmv, PeriodicJacobi, PiecewisePotential, PtKind, PtSequence, Schedule,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtspecStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed JSON or an argument outside its domain.
    InvalidInput = 3,
    /// The computation failed numerically.
    Numerical = 4,
    /// Internal error; the library state is unaffected.
    Panic = 5,
}

/// Periodic Jacobi operator.
pub struct PtspecJacobi(PeriodicJacobi);
/// Periodic piecewise-constant potential of a continuum Schrödinger operator.
pub struct PtspecPotential(PiecewisePotential);
/// Periodic CMV operator.
pub struct PtspecCmv(PeriodicCmv);
/// Chain of periodic approximants.
pub struct PtspecSequence(PtSequence);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(PtspecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() {
            PtspecStatus::InvalidInput
        } else {
            PtspecStatus::Numerical
        };
        Failure(code, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(PtspecStatus::InvalidInput, format!("json: {e}"))
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Run `f`, record any failure, and map it to a status.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> PtspecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PtspecStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            PtspecStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PtspecStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PtspecStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_json<S: serde::Serialize>(out: *mut *mut c_char, value: &S) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let text = serde_json::to_string(value)?;
    let c = CString::new(text).map_err(|_| Failure(PtspecStatus::Panic, "interior NUL in JSON".into()))?;
    out.write(c.into_raw());
    Ok(())
}

unsafe fn create<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    write_out(out, Box::into_raw(Box::new(value)))
}

/// `NaN` means "not given".
fn opt_f64(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Schema version of every JSON report.
#[no_mangle]
pub extern "C" fn ptspec_schema_version() -> u32 {
    verify::SCHEMA_VERSION
}

/// Message of the last failed call on this thread (empty after a success).
/// Valid until the next call on this thread; do not free.
#[no_mangle]
pub extern "C" fn ptspec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptspec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn release<T>(h: *mut T) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Release a Jacobi handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptspec_jacobi_free(h: *mut PtspecJacobi) {
    release(h)
}

/// Release a potential handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptspec_potential_free(h: *mut PtspecPotential) {
    release(h)
}

/// Release a CMV handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptspec_cmv_free(h: *mut PtspecCmv) {
    release(h)
}

/// Release a sequence handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptspec_sequence_free(h: *mut PtspecSequence) {
    release(h)
}

/// Parse a Jacobi operator, e.g. `{"p":2,"a":[1,1],"b":[1,-1]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_jacobi_from_json(json: *const c_char, out: *mut *mut PtspecJacobi) -> PtspecStatus {
    guard(|| {
        let j: PeriodicJacobi = serde_json::from_str(str_arg(json, "json")?)?;
        create(out, PtspecJacobi(j))
    })
}

/// Discriminant `Δ(E)`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_jacobi_discriminant(h: *const PtspecJacobi, e: f64, out: *mut f64) -> PtspecStatus {
    guard(|| write_out(out, handle(h, "handle")?.0.discriminant(e)))
}

/// Band structure as JSON.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_jacobi_bands_json(h: *const PtspecJacobi, out: *mut *mut c_char) -> PtspecStatus {
    guard(|| write_json(out, &handle(h, "handle")?.0.band_structure()?))
}

/// Parse a potential, e.g. `{"T":2,"breakpoints":[0,1,2],"values":[1,0]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_potential_from_json(
    json: *const c_char,
    out: *mut *mut PtspecPotential,
) -> PtspecStatus {
    guard(|| {
        let v: PiecewisePotential = serde_json::from_str(str_arg(json, "json")?)?;
        create(out, PtspecPotential(v))
    })
}

/// Discriminant `Δ(E)` of `-y'' + V y = E y`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_potential_discriminant(
    h: *const PtspecPotential,
    e: f64,
    out: *mut f64,
) -> PtspecStatus {
    guard(|| write_out(out, handle(h, "handle")?.0.discriminant(e)))
}

/// Band structure in the window `(-∞, e_max]` as JSON.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_potential_bands_json(
    h: *const PtspecPotential,
    e_max: f64,
    out: *mut *mut c_char,
) -> PtspecStatus {
    guard(|| write_json(out, &handle(h, "handle")?.0.band_structure_window(e_max)?))
}

/// Besicovitch and Stepanov norms.
///
/// # Safety
/// `h` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_potential_norms(
    h: *const PtspecPotential,
    besicovitch: *mut f64,
    stepanov: *mut f64,
) -> PtspecStatus {
    guard(|| {
        let v = &handle(h, "handle")?.0;
        if besicovitch.is_null() || stepanov.is_null() {
            return Err(null("output pointer"));
        }
        write_out(besicovitch, v.besicovitch_norm())?;
        write_out(stepanov, v.stepanov_norm())
    })
}

/// Parse a CMV operator, e.g. `{"p":2,"alpha":[[0.5,0],[0.5,0]]}`
/// (complex numbers as `[re, im]`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_cmv_from_json(json: *const c_char, out: *mut *mut PtspecCmv) -> PtspecStatus {
    guard(|| {
        let c: PeriodicCmv = serde_json::from_str(str_arg(json, "json")?)?;
        create(out, PtspecCmv(c))
    })
}

/// Spectral arcs as JSON.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_cmv_bands_json(h: *const PtspecCmv, out: *mut *mut c_char) -> PtspecStatus {
    guard(|| write_json(out, &handle(h, "handle")?.0.arc_band_structure()?))
}

/// Certify τ-homogeneity of a set with the default lattice. `set_json` is
/// an interval set (`{"parts":[[lo,hi],...]}`) when `circle == 0`, an arc
/// set (`[[start,end],...]`) otherwise.
///
/// # Safety
/// `set_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_certify_homogeneity_json(
    set_json: *const c_char,
    circle: i32,
    tau: f64,
    delta0: f64,
    out: *mut *mut c_char,
) -> PtspecStatus {
    guard(|| {
        let text = str_arg(set_json, "set_json")?;
        let spec = LatticeSpec::default();
        let report = if circle == 0 {
            let set: IntervalSet = serde_json::from_str(text)?;
            certify_homogeneity(&set, tau, delta0, &spec)?
        } else {
            let set: CircularArcSet = serde_json::from_str(text)?;
            certify_arc_homogeneity(&set, tau, delta0, &spec)?
        };
        write_json(out, &report)
    })
}

/// Generate a PT sequence. `kind` is `continuum`, `jacobi` or `cmv`;
/// `schedule` is null for the default, else as the CLI `--schedule` flag.
///
/// # Safety
/// String arguments must be NUL-terminated (or null where allowed); `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_pt_generate(
    kind: *const c_char,
    seed: u64,
    levels: usize,
    schedule: *const c_char,
    out: *mut *mut PtspecSequence,
) -> PtspecStatus {
    guard(|| {
        let kind: PtKind = str_arg(kind, "kind")?.parse()?;
        let schedule: Schedule = match opt_str_arg(schedule, "schedule")? {
            Some(s) => s.parse()?,
            None => Schedule::default(),
        };
        create(
            out,
            PtspecSequence(generate_pt_sequence(kind, seed, levels, &schedule)?),
        )
    })
}

/// Parse a sequence previously written by [`ptspec_sequence_to_json`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_sequence_from_json(json: *const c_char, out: *mut *mut PtspecSequence) -> PtspecStatus {
    guard(|| {
        let s: PtSequence = serde_json::from_str(str_arg(json, "json")?)?;
        create(out, PtspecSequence(s))
    })
}

/// Serialize a sequence.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_sequence_to_json(h: *const PtspecSequence, out: *mut *mut c_char) -> PtspecStatus {
    guard(|| write_json(out, &handle(h, "handle")?.0))
}

/// Number of levels.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_sequence_len(h: *const PtspecSequence, out: *mut usize) -> PtspecStatus {
    guard(|| write_out(out, handle(h, "handle")?.0.len()))
}

/// Step-by-step homogeneity budget as JSON. `options_json` is null for the
/// defaults, else a partial options object, e.g. `{"tau":0.5}`.
///
/// # Safety
/// `h` must be a live handle; `options_json` null or NUL-terminated; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_step_homogeneity_json(
    h: *const PtspecSequence,
    options_json: *const c_char,
    out: *mut *mut c_char,
) -> PtspecStatus {
    guard(|| {
        let seq = &handle(h, "handle")?.0;
        let opts: StepOptions = match opt_str_arg(options_json, "options_json")? {
            Some(s) => serde_json::from_str(s)?,
            None => StepOptions::default(),
        };
        write_json(out, &verify::step_homogeneity(seq, &opts)?)
    })
}

/// Semicontinuity check on the first band cluster. `e_max` is the window
/// top (`NaN` or `+∞` for discrete kinds).
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_semicontinuity_json(
    h: *const PtspecSequence,
    e_max: f64,
    out: *mut *mut c_char,
) -> PtspecStatus {
    guard(|| {
        let seq = &handle(h, "handle")?.0;
        let e_max = opt_f64(e_max).unwrap_or(f64::INFINITY);
        write_json(out, &verify::verify_semicontinuity(seq, None, e_max)?)
    })
}

/// Fit or verify an estimate over an ensemble. `check` is one of the names
/// in the CLI `verify --check` list except `semicontinuity`/`gap-sums`;
/// `constant` is `NaN` to fit; `e_max` is `NaN` when not needed.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptspec_verify_json(
    check: *const c_char,
    ensemble_json: *const c_char,
    constant: f64,
    e_max: f64,
    n_max: usize,
    out: *mut *mut c_char,
) -> PtspecStatus {
    guard(|| {
        let check = str_arg(check, "check")?;
        let ensemble: Ensemble = serde_json::from_str(str_arg(ensemble_json, "ensemble_json")?)?;
        let fit = verify::run_ensemble_check(check, &ensemble, opt_f64(constant), opt_f64(e_max), n_max)?;
        write_json(out, &fit)
    })
}
