//! C ABI over `nhdyn`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` / `*_load`
//! functions and released by the matching `*_free`. Every fallible call
//! returns an [`NhdynStatus`]; on failure the message is kept per thread and
//! read with [`nhdyn_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nhdyn::algebra::{build_su11_boson_rep, build_su2_rep, AlgebraKind, Representation};
use nhdyn::cli::{load_config, parse_config, run, Command, RunConfig, RunReport};
use nhdyn::decomposition::{gauss_decompose, CanonicalParams};
use nhdyn::oracle::swanson_spectrum;
use nhdyn::Error;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FileNotFound = 3,
    Parse = 4,
    Validation = 5,
    SingularDecomposition = 6,
    SingularFlow = 7,
    NoStationaryPoint = 8,
    Stiffness = 9,
    TruncationContaminated = 10,
    Undefined = 11,
    Io = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhdynAlgebra {
    Su2 = 0,
    Su11 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhdynCommand {
    Decompose = 0,
    Flow = 1,
    Evolve = 2,
    Verify = 3,
    Spectrum = 4,
}

/// Ordered factors `exp(θ+ K+) exp(ln θ0 K0) exp(θ- K-)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NhdynGauss {
    pub theta_plus_re: f64,
    pub theta_plus_im: f64,
    pub theta_zero_re: f64,
    pub theta_zero_im: f64,
    pub theta_minus_re: f64,
    pub theta_minus_im: f64,
}

/// Validated run configuration.
pub struct NhdynConfig(RunConfig);

/// Result of a run.
pub struct NhdynReport(RunReport);

/// Matrix representation of the algebra.
pub struct NhdynRepresentation(Representation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NhdynStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Domain { .. } => {
            NhdynStatus::InvalidArgument
        }
        Error::SingularDecomposition(_) => NhdynStatus::SingularDecomposition,
        Error::SingularFlow { .. } => NhdynStatus::SingularFlow,
        Error::NoStationaryPoint(_) => NhdynStatus::NoStationaryPoint,
        Error::Stiffness { .. } => NhdynStatus::Stiffness,
        Error::TruncationContaminated { .. } => NhdynStatus::TruncationContaminated,
        Error::Undefined(_) => NhdynStatus::Undefined,
        Error::FileNotFound(_) => NhdynStatus::FileNotFound,
        Error::Parse { .. } => NhdynStatus::Parse,
        Error::Validation { .. } => NhdynStatus::Validation,
        Error::AtTime { source, .. } => status_of(source),
        Error::Io(_) | Error::Csv(_) => NhdynStatus::Io,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (NhdynStatus, String)>) -> NhdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NhdynStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NhdynStatus::Panic
        }
    }
}

fn lift<T>(r: nhdyn::Result<T>) -> Result<T, (NhdynStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (NhdynStatus, String) {
    (NhdynStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NhdynStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NhdynStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nhdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the calling thread's last error message, or NULL if none.
/// Release with `nhdyn_string_free`.
#[no_mangle]
pub extern "C" fn nhdyn_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a JSON run configuration from `path`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_config_load(path: *const c_char, out: *mut *mut NhdynConfig) -> NhdynStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        put(out, NhdynConfig(lift(load_config(Path::new(path)))?));
        Ok(())
    })
}

/// Parses a JSON run configuration from memory. Relative table paths are
/// resolved against `base_dir` (NULL means the working directory).
#[no_mangle]
pub unsafe extern "C" fn nhdyn_config_parse(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut NhdynConfig,
) -> NhdynStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let json = str_arg(json, "json")?;
        let base = if base_dir.is_null() {
            "."
        } else {
            str_arg(base_dir, "base_dir")?
        };
        put(out, NhdynConfig(lift(parse_config(json, Path::new(base), "<memory>"))?));
        Ok(())
    })
}

/// Overrides the flow tolerances; a non-positive value keeps the current one.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_config_set_tolerances(cfg: *mut NhdynConfig, rtol: f64, atol: f64) -> NhdynStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let pick = |x: f64| (x > 0.0).then_some(x);
        let mut next = cfg.0.clone();
        lift(next.set_tolerances(pick(rtol), pick(atol)))?;
        cfg.0 = next;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nhdyn_config_free(cfg: *mut NhdynConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs `command`, writing its files into `out_dir`. A run that completes but
/// fails certification still returns `Ok`; query `nhdyn_report_certified`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_run(
    cfg: *const NhdynConfig,
    command: NhdynCommand,
    out_dir: *const c_char,
    out: *mut *mut NhdynReport,
) -> NhdynStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let dir = str_arg(out_dir, "out_dir")?;
        let cmd = match command {
            NhdynCommand::Decompose => Command::Decompose,
            NhdynCommand::Flow => Command::Flow,
            NhdynCommand::Evolve => Command::Evolve,
            NhdynCommand::Verify => Command::Verify,
            NhdynCommand::Spectrum => Command::Spectrum,
        };
        put(out, NhdynReport(lift(run(cmd, &cfg.0, Path::new(dir)))?));
        Ok(())
    })
}

/// 1 if the run passed certification, 0 if not or if `report` is NULL.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_report_certified(report: *const NhdynReport) -> i32 {
    report.as_ref().map_or(0, |r| i32::from(r.0.certified))
}

/// Largest closed-form vs oracle error; `Undefined` unless the run compared
/// against the oracle.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_report_max_oracle_error(report: *const NhdynReport, out: *mut f64) -> NhdynStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.0.max_oracle_error.ok_or((
            NhdynStatus::Undefined,
            "run did not compare against the oracle".to_string(),
        ))?;
        Ok(())
    })
}

/// The report as JSON (same bytes as `report.json`). Release with
/// `nhdyn_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_report_json(report: *const NhdynReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| owned_string(r.0.to_json()))
}

#[no_mangle]
pub unsafe extern "C" fn nhdyn_report_free(report: *mut NhdynReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Spin-`j` representation of su(2) (`twice_j` = 2j ≥ 1).
#[no_mangle]
pub unsafe extern "C" fn nhdyn_representation_su2(twice_j: u32, out: *mut *mut NhdynRepresentation) -> NhdynStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, NhdynRepresentation(lift(build_su2_rep(f64::from(twice_j) / 2.0))?));
        Ok(())
    })
}

/// Truncated boson representation of su(1,1) with Fock cutoff `cutoff`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_representation_su11(cutoff: usize, out: *mut *mut NhdynRepresentation) -> NhdynStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, NhdynRepresentation(lift(build_su11_boson_rep(cutoff))?));
        Ok(())
    })
}

/// Matrix dimension, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_representation_dim(rep: *const NhdynRepresentation) -> usize {
    rep.as_ref().map_or(0, |r| r.0.dim())
}

/// Copies K0, K+ or K- (`which` = 0, 1, 2) in column-major order into
/// `re` / `im`, each of length `dim * dim`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_representation_matrix(
    rep: *const NhdynRepresentation,
    which: u32,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NhdynStatus {
    guard(|| {
        let rep = &rep.as_ref().ok_or_else(|| null("rep"))?.0;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let m = match which {
            0 => rep.k0(),
            1 => rep.kplus(),
            2 => rep.kminus(),
            _ => {
                return Err((
                    NhdynStatus::InvalidArgument,
                    format!("which must be 0, 1 or 2, got {which}"),
                ))
            }
        };
        if len != m.len() {
            return Err((
                NhdynStatus::InvalidArgument,
                format!("buffer length {len}, need {}", m.len()),
            ));
        }
        let (re, im) = (
            std::slice::from_raw_parts_mut(re, len),
            std::slice::from_raw_parts_mut(im, len),
        );
        for (i, z) in m.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nhdyn_representation_free(rep: *mut NhdynRepresentation) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Ordered factors of `exp(2ε K0 + 2μ K- + 2μ* K+)`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_gauss_decompose(
    algebra: NhdynAlgebra,
    eps: f64,
    mu_re: f64,
    mu_im: f64,
    out: *mut NhdynGauss,
) -> NhdynStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let kind = match algebra {
            NhdynAlgebra::Su2 => AlgebraKind::Su2,
            NhdynAlgebra::Su11 => AlgebraKind::Su11,
        };
        let g = lift(gauss_decompose(
            &CanonicalParams::new(eps, Complex64::new(mu_re, mu_im)),
            kind,
        ))?;
        *out = NhdynGauss {
            theta_plus_re: g.theta_plus.re,
            theta_plus_im: g.theta_plus.im,
            theta_zero_re: g.theta_zero.re,
            theta_zero_im: g.theta_zero.im,
            theta_minus_re: g.theta_minus.re,
            theta_minus_im: g.theta_minus.im,
        };
        Ok(())
    })
}

/// Eigenvalues of the constant su(1,1) Hamiltonian in a Fock cutoff, sorted
/// by real part. Buffers have length `cutoff`; `trusted[n]` is 1 for the
/// lowest `cutoff / 2` levels.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_swanson_spectrum(
    omega_re: f64,
    omega_im: f64,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    cutoff: usize,
    re: *mut f64,
    im: *mut f64,
    trusted: *mut u8,
) -> NhdynStatus {
    guard(|| {
        if re.is_null() || im.is_null() || trusted.is_null() {
            return Err(null("output buffer"));
        }
        let spec = lift(swanson_spectrum(
            Complex64::new(omega_re, omega_im),
            Complex64::new(alpha_re, alpha_im),
            Complex64::new(beta_re, beta_im),
            cutoff,
        ))?;
        let re = std::slice::from_raw_parts_mut(re, cutoff);
        let im = std::slice::from_raw_parts_mut(im, cutoff);
        let trusted = std::slice::from_raw_parts_mut(trusted, cutoff);
        for (i, e) in spec.iter().enumerate() {
            re[i] = e.value.re;
            im[i] = e.value.im;
            trusted[i] = u8::from(e.trusted);
        }
        Ok(())
    })
}
