//! C ABI over `minsupport`.
//!
//! Matrices cross the boundary as column-major arrays of [`MsComplex`].
//! Pairs live behind the opaque [`MsPair`] handle. Every fallible call
//! returns an [`MsStatus`]; on failure [`ms_last_error`] describes it until
//! the next call on the same thread. Panics are caught and reported as
//! [`MsStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minsupport::adequacy::{descend, DescentConfig};
use minsupport::domain::{hadamard_square, validate_pair, OrthoPair, PairFile, Tolerances};
use minsupport::linalg::{c, CMat};
use minsupport::moment::{support_certificate, CertificateConfig};
use minsupport::oracle::{fw_distance, FwConfig};
use minsupport::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NoConvergence = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsComplex {
    pub re: f64,
    pub im: f64,
}

/// An orthogonal pair `(V, W)` of isometries.
pub struct MsPair(OrthoPair);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsDescentConfig {
    pub max_iters: usize,
    /// Step of the modulus iteration, in (0, 1].
    pub step: f64,
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub line_search: bool,
    pub refine: bool,
}

impl From<MsDescentConfig> for DescentConfig {
    fn from(c: MsDescentConfig) -> Self {
        DescentConfig {
            max_iters: c.max_iters,
            step: c.step,
            grad_tol: c.grad_tol,
            restarts: c.restarts,
            seed: c.seed,
            line_search: c.line_search,
            refine: c.refine,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MsAdequacy {
    pub delta: f64,
    pub grad_norm: f64,
    pub lambda: f64,
    pub mu: f64,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MsOracle {
    pub delta: f64,
    pub fw_gap: f64,
    pub iters: usize,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MsCertificate {
    pub det: f64,
    pub residual: f64,
    pub valid: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Fail {
    Null(&'static str),
    Input(String),
    NoConvergence(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Input(e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            MsStatus::NullPointer
        }
        Ok(Err(Fail::Input(msg))) => {
            set_error(&msg);
            MsStatus::InvalidInput
        }
        Ok(Err(Fail::NoConvergence(msg))) => {
            set_error(&msg);
            MsStatus::NoConvergence
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            MsStatus::Internal
        }
    }
}

/// # Safety
/// `data` must be null or point to `rows * cols` readable elements.
unsafe fn read_matrix(
    data: *const MsComplex,
    rows: usize,
    cols: usize,
    what: &'static str,
) -> Result<CMat, Fail> {
    if data.is_null() {
        return Err(Fail::Null(what));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Fail::Input(format!("{what}: size overflow")))?;
    let entries = std::slice::from_raw_parts(data, len);
    Ok(CMat::from_iterator(
        rows,
        cols,
        entries.iter().map(|z| c(z.re, z.im)),
    ))
}

fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    // SAFETY: callers pass pointers to writable storage of type T.
    unsafe { p.as_mut() }.ok_or(Fail::Null(what))
}

fn pair_ref<'a>(p: *const MsPair) -> Result<&'a OrthoPair, Fail> {
    // SAFETY: non-null handles come from ms_pair_new or ms_pair_from_json.
    unsafe { p.as_ref() }
        .map(|h| &h.0)
        .ok_or(Fail::Null("pair"))
}

/// Validates `V` (`n x r`) and `W` (`n x s`) and stores a new handle in
/// `*out`. Release it with [`ms_pair_free`].
///
/// # Safety
/// `v` and `w` must point to `n * r` and `n * s` elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ms_pair_new(
    n: usize,
    r: usize,
    s: usize,
    v: *const MsComplex,
    w: *const MsComplex,
    ortho_tol: f64,
    out: *mut *mut MsPair,
) -> MsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let v = read_matrix(v, n, r, "v")?;
        let w = read_matrix(w, n, s, "w")?;
        let pair = validate_pair(&v, &w, ortho_tol)?;
        *out = Box::into_raw(Box::new(MsPair(pair)));
        Ok(())
    })
}

/// Parses a pair file (`{"n", "V", "W"}`) from a nul-terminated UTF-8
/// string and validates it with the default tolerance.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_pair_from_json(json: *const c_char, out: *mut *mut MsPair) -> MsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail::Input(e.to_string()))?;
        let file: PairFile = serde_json::from_str(text).map_err(|e| Fail::Input(e.to_string()))?;
        let pair = file.validate(Tolerances::default().ortho_tol)?;
        *out = Box::into_raw(Box::new(MsPair(pair)));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `pair` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_pair_free(pair: *mut MsPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Writes `n`, `dim V` and `dim W`. Null outputs are skipped.
///
/// # Safety
/// `pair` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_pair_dims(
    pair: *const MsPair,
    n: *mut usize,
    r: *mut usize,
    s: *mut usize,
) -> MsStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        for (dst, val) in [(n, p.n()), (r, p.r()), (s, p.s())] {
            if let Some(d) = dst.as_mut() {
                *d = val;
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ms_descent_config_default() -> MsDescentConfig {
    let d = DescentConfig::default();
    MsDescentConfig {
        max_iters: d.max_iters,
        step: d.step,
        grad_tol: d.grad_tol,
        restarts: d.restarts,
        seed: d.seed,
        line_search: d.line_search,
        refine: d.refine,
    }
}

/// Multi-start descent estimate of the adequacy. The result is written even
/// when the status is [`MsStatus::NoConvergence`].
///
/// # Safety
/// `pair` must be a live handle, `cfg` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_adequacy(
    pair: *const MsPair,
    cfg: *const MsDescentConfig,
    out: *mut MsAdequacy,
) -> MsStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        let cfg = *cfg.as_ref().ok_or(Fail::Null("cfg"))?;
        let out = out_ref(out, "out")?;
        let res = descend(p, &cfg.into())?;
        *out = MsAdequacy {
            delta: res.delta,
            grad_norm: res.grad_norm,
            lambda: res.lambda,
            mu: res.mu,
            iterations: res.iterations,
            restart_index: res.restart_index,
            converged: res.converged,
        };
        if res.converged {
            Ok(())
        } else {
            Err(Fail::NoConvergence(format!(
                "gradient norm {:.3e} above tolerance",
                res.grad_norm
            )))
        }
    })
}

/// Frank-Wolfe estimate of the adequacy with exact line search. The result
/// is written even when the status is [`MsStatus::NoConvergence`].
///
/// # Safety
/// `pair` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_oracle(
    pair: *const MsPair,
    gap_tol: f64,
    max_iters: usize,
    out: *mut MsOracle,
) -> MsStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        let out = out_ref(out, "out")?;
        let res = fw_distance(
            p,
            &FwConfig {
                max_iters,
                gap_tol,
                line_search: true,
            },
        )?;
        *out = MsOracle {
            delta: res.delta,
            fw_gap: res.fw_gap,
            iters: res.iters,
            converged: res.converged,
        };
        if res.converged {
            Ok(())
        } else {
            Err(Fail::NoConvergence(format!(
                "Frank-Wolfe gap {:.3e} above tolerance",
                res.fw_gap
            )))
        }
    })
}

/// `out[i] = Σ_j |m[i, j]|²` for an `rows x cols` matrix.
///
/// # Safety
/// `m` must point to `rows * cols` elements and `out` to `rows` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_hadamard_square(
    rows: usize,
    cols: usize,
    m: *const MsComplex,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        let m = read_matrix(m, rows, cols, "m")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let values = hadamard_square(&m).into_vec();
        std::slice::from_raw_parts_mut(out, rows).copy_from_slice(&values);
        Ok(())
    })
}

/// Solves the square moment system of `n` columns (`n x n`) against the
/// generator `w` (`n x 1`). Coefficients go to `x` (`n` doubles).
///
/// # Safety
/// `columns`, `w` must point to `n * n` and `n` elements; `x` to `n`
/// writable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_support_certificate(
    n: usize,
    columns: *const MsComplex,
    w: *const MsComplex,
    x: *mut f64,
    out: *mut MsCertificate,
) -> MsStatus {
    guard(|| {
        let columns = read_matrix(columns, n, n, "columns")?;
        let w = read_matrix(w, n, 1, "w")?;
        let out = out_ref(out, "out")?;
        if x.is_null() {
            return Err(Fail::Null("x"));
        }
        let cert = support_certificate(&columns, &w, &CertificateConfig::default())?;
        std::slice::from_raw_parts_mut(x, n).copy_from_slice(&cert.solution);
        *out = MsCertificate {
            det: cert.det,
            residual: cert.residual,
            valid: cert.is_valid(),
        };
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
