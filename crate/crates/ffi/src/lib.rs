//! C interface to the cheshire toolkit.
//!
//! Every function returns a [`CheshireStatus`]. On failure the message is
//! available from [`cheshire_last_error`] on the same thread. Scenarios are
//! opaque handles created by `cheshire_scenario_*` constructors and released
//! with [`cheshire_scenario_free`]. Strings returned to the caller are freed
//! with [`cheshire_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cheshire::qcore::{c64, HilbertLayout, LinearOperator, Mode, ModeKind, QuantumState};
use cheshire::scenario::{self, run_scenario, RunMode, RunParams, Scenario, ScenarioRun};
use cheshire::weakval;
use cheshire::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheshireStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Validation = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Io = 8,
    UnknownScenario = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheshireComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque scenario handle.
pub struct CheshireScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CheshireStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() {
            CheshireStatus::Numerical
        } else {
            match (&e, e.root()) {
                (Error::Validation(_), _) => CheshireStatus::Validation,
                (_, Error::Parse { .. }) => CheshireStatus::Parse,
                (_, Error::Io { .. }) => CheshireStatus::Io,
                (_, Error::UnknownScenario(_)) => CheshireStatus::UnknownScenario,
                (_, Error::InvalidArgument(_) | Error::ZeroCoupling | Error::EmptySamples) => {
                    CheshireStatus::InvalidArgument
                }
                _ => CheshireStatus::Validation,
            }
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: CheshireStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CheshireStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CheshireStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            CheshireStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(CheshireStatus::NullPointer, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CheshireStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn scenario_arg<'a>(s: *const CheshireScenario) -> Result<&'a Scenario, Failure> {
    non_null(s, "scenario")?;
    Ok(&(*s).inner)
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, needed: usize, what: &str) -> Result<&'a mut [T], Failure> {
    non_null(p, what)?;
    if len < needed {
        return Err(fail(
            CheshireStatus::BufferTooSmall,
            format!("`{what}` holds {len} entries, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn emit_handle(out: *mut *mut CheshireScenario, s: Scenario) -> Result<(), Failure> {
    non_null(out, "out")?;
    *out = Box::into_raw(Box::new(CheshireScenario { inner: s }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cheshire_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Built-in scenario `"single-cat"` or `"grin-swap"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_builtin(
    name: *const c_char,
    out: *mut *mut CheshireScenario,
) -> CheshireStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let s = scenario::builtin(name).ok_or_else(|| {
            fail(CheshireStatus::UnknownScenario, format!("unknown scenario `{name}`"))
        })?;
        emit_handle(out, s)
    })
}

/// Parses `.qcc` text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_parse(
    text: *const c_char,
    out: *mut *mut CheshireScenario,
) -> CheshireStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        emit_handle(out, scenario::parse_scenario(text)?)
    })
}

/// Reads and parses a `.qcc` file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_load(
    path: *const c_char,
    out: *mut *mut CheshireScenario,
) -> CheshireStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        emit_handle(out, scenario::load_scenario(Path::new(path))?)
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `s` must come from a `cheshire_scenario_*` constructor and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_free(s: *mut CheshireScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_observable_count(
    s: *const CheshireScenario,
    out: *mut usize,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        non_null(out, "out")?;
        *out = s.observables.len();
        Ok(())
    })
}

/// Copies the NUL-terminated name of observable `index` into `buf`.
/// `needed` (optional) receives the required capacity including the NUL.
///
/// # Safety
/// `s` must be a live handle; `buf` must hold `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_observable_name(
    s: *const CheshireScenario,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        let o = s.observables.get(index).ok_or_else(|| {
            fail(
                CheshireStatus::InvalidArgument,
                format!("observable index {index} out of range ({})", s.observables.len()),
            )
        })?;
        let bytes = o.name.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        let dst = out_slice(buf, cap, bytes.len() + 1, "buf")?;
        for (d, &b) in dst.iter_mut().zip(bytes) {
            *d = b as c_char;
        }
        dst[bytes.len()] = 0;
        Ok(())
    })
}

/// `|⟨post|pre⟩|²` of the scenario.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_postselection_probability(
    s: *const CheshireScenario,
    out: *mut f64,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        non_null(out, "out")?;
        *out = weakval::postselection_probability(&s.preselection, &s.postselection)?;
        Ok(())
    })
}

/// Canonical `.qcc` text; free it with [`cheshire_string_free`].
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_scenario_serialize(
    s: *const CheshireScenario,
    out: *mut *mut c_char,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        non_null(out, "out")?;
        let text = CString::new(scenario::serialize_scenario(s))
            .map_err(|_| fail(CheshireStatus::InvalidArgument, "scenario text contains NUL"))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cheshire_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

fn run(s: &Scenario, mode: RunMode, params: &RunParams) -> Result<ScenarioRun, Failure> {
    Ok(run_scenario(s, mode, params)?)
}

/// Exact weak values of every observable, in declaration order. Both arrays
/// must hold at least `len >= observable count` entries.
///
/// # Safety
/// `s` must be a live handle; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn cheshire_run_exact(
    s: *const CheshireScenario,
    out: *mut CheshireComplex,
    len: usize,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        let dst = out_slice(out, len, s.observables.len(), "out")?;
        let r = run(s, RunMode::Exact, &RunParams::default())?;
        for (d, o) in dst.iter_mut().zip(&r.results) {
            *d = CheshireComplex {
                re: o.weak_value.re,
                im: o.weak_value.im,
            };
        }
        Ok(())
    })
}

/// Pointer-model estimates `mean/g` at coupling `g` (the scenario's own
/// coupling when `g` is 0).
///
/// # Safety
/// `s` must be a live handle; `estimates` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn cheshire_run_pointer(
    s: *const CheshireScenario,
    g: f64,
    estimates: *mut f64,
    len: usize,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        let dst = out_slice(estimates, len, s.observables.len(), "estimates")?;
        let params = RunParams {
            g: (g != 0.0).then_some(g),
            ..RunParams::default()
        };
        let r = run(s, RunMode::Pointer, &params)?;
        for (d, o) in dst.iter_mut().zip(&r.results) {
            *d = o.estimate.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Monte Carlo estimates from `samples` trials per observable. Observable
/// `k` draws from the stream seeded `seed + k`. `acceptance` may be null.
///
/// # Safety
/// `s` must be a live handle; each non-null array must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn cheshire_run_montecarlo(
    s: *const CheshireScenario,
    g: f64,
    samples: usize,
    seed: u64,
    estimates: *mut f64,
    std_errors: *mut f64,
    acceptance: *mut f64,
    len: usize,
) -> CheshireStatus {
    guard(|| {
        let s = scenario_arg(s)?;
        let n = s.observables.len();
        let est = out_slice(estimates, len, n, "estimates")?;
        let err = out_slice(std_errors, len, n, "std_errors")?;
        let acc = if acceptance.is_null() {
            None
        } else {
            Some(out_slice(acceptance, len, n, "acceptance")?)
        };
        let params = RunParams {
            g: (g != 0.0).then_some(g),
            seed,
            samples: Some(samples),
            ..RunParams::default()
        };
        let r = run(s, RunMode::MonteCarlo, &params)?;
        for (k, o) in r.results.iter().enumerate() {
            est[k] = o.estimate.unwrap_or(f64::NAN);
            err[k] = o.std_error.unwrap_or(f64::NAN);
        }
        if let Some(acc) = acc {
            for (d, o) in acc.iter_mut().zip(&r.results) {
                *d = o.acceptance_rate.unwrap_or(f64::NAN);
            }
        }
        Ok(())
    })
}

/// Weak value `⟨post|A|pre⟩/⟨post|pre⟩` for dense inputs of dimension `dim`.
/// `a` is row-major `dim × dim`; the states are normalized first.
///
/// # Safety
/// `a` must hold `dim*dim` elements, `pre` and `post` `dim` elements each;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheshire_weak_value(
    dim: usize,
    a: *const CheshireComplex,
    pre: *const CheshireComplex,
    post: *const CheshireComplex,
    out: *mut CheshireComplex,
) -> CheshireStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(pre, "pre")?;
        non_null(post, "post")?;
        non_null(out, "out")?;
        if dim == 0 {
            return Err(fail(CheshireStatus::InvalidArgument, "dimension must be positive"));
        }
        let entries = dim
            .checked_mul(dim)
            .ok_or_else(|| fail(CheshireStatus::InvalidArgument, "dimension too large"))?;
        let names: Vec<String> = (0..dim).map(|k| k.to_string()).collect();
        let labels: Vec<&str> = names.iter().map(String::as_str).collect();
        let layout = HilbertLayout::new(vec![Mode::new("q", ModeKind::Path, &labels)])?;
        let to_c = |p: *const CheshireComplex, n: usize| {
            std::slice::from_raw_parts(p, n)
                .iter()
                .map(|z| c64(z.re, z.im))
                .collect::<Vec<_>>()
        };
        let op = LinearOperator::from_rows(layout.clone(), &to_c(a, entries))?;
        let pre = QuantumState::new(layout.clone(), to_c(pre, dim))?.normalize()?;
        let post = QuantumState::new(layout, to_c(post, dim))?.normalize()?;
        let w = weakval::weak_value(&op, &pre, &post)?;
        *out = CheshireComplex { re: w.re, im: w.im };
        Ok(())
    })
}
