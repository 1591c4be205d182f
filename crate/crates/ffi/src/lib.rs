//! C ABI over the `metacode` crate.
//!
//! Every function returns an [`McStatus`]. On failure a message is stored
//! per thread and can be read with [`mc_last_error`]. Handles are created by
//! `*_new`/`*_load` and must be released with the matching `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use metacode::inverse::{build_target, ga_run, GaConfig};
use metacode::netcalc::{self, SwitchModel};
use metacode::oracle::{self, Oracle, ResponseModel, N_FREQ};
use metacode::pattern::Genome;
use metacode::surrogate::SurrogateModel;
use metacode::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoSolution = 3,
    Singular = 4,
    Io = 5,
    Format = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McComplex {
    pub re: f64,
    pub im: f64,
}

impl From<McComplex> for Complex64 {
    fn from(c: McComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for McComplex {
    fn from(c: Complex64) -> Self {
        McComplex { re: c.re, im: c.im }
    }
}

/// Opaque oracle handle.
pub struct McOracle {
    inner: Oracle,
}

/// Opaque surrogate handle.
pub struct McSurrogate {
    inner: SurrogateModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> McStatus {
    match e {
        Error::NoSolution(_) | Error::NoContrast(_) => McStatus::NoSolution,
        Error::SingularLoad(_) | Error::SingularReflection(_) | Error::ResonanceSingularity(_) => McStatus::Singular,
        Error::Io(_) | Error::MissingArtifact(_) | Error::ArtifactExists(_) => McStatus::Io,
        Error::Format { .. } | Error::Json(_) | Error::FingerprintMismatch { .. } => McStatus::Format,
        _ => McStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (McStatus, String)>) -> McStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            McStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            McStatus::Panic
        }
    }
}

fn lib(e: Error) -> (McStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (McStatus, String) {
    (McStatus::NullPointer, format!("{name} is null"))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (McStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn mc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Number of points on the fixed frequency grid (61).
#[no_mangle]
pub extern "C" fn mc_n_freq() -> usize {
    N_FREQ
}

/// Frequency of grid point `i` in Hz, or NaN when out of range.
#[no_mangle]
pub extern "C" fn mc_grid_freq(i: usize) -> f64 {
    if i < N_FREQ {
        oracle::grid_freq(i)
    } else {
        f64::NAN
    }
}

/// Reflection coefficient of load impedance `zl` against free space.
#[no_mangle]
pub unsafe extern "C" fn mc_reflection_of_load(zl: McComplex, gamma: *mut McComplex) -> McStatus {
    guard(|| {
        let g = netcalc::reflection_of_load(zl.into()).map_err(lib)?;
        *out(gamma, "gamma")? = g.into();
        Ok(())
    })
}

/// Load reflections of the built-in PIN diode at `freq_hz`, state 0 then 1.
#[no_mangle]
pub unsafe extern "C" fn mc_pin_load_reflections(freq_hz: f64, gl0: *mut McComplex, gl1: *mut McComplex) -> McStatus {
    guard(|| {
        let (a, b) = SwitchModel::pin_diode().load_reflections(freq_hz).map_err(lib)?;
        *out(gl0, "gl0")? = a.into();
        *out(gl1, "gl1")? = b.into();
        Ok(())
    })
}

/// Reflection seen at the free-space port with the static part described by
/// `(a22, theta22)` and the switch port loaded by `gl`.
#[no_mangle]
pub unsafe extern "C" fn mc_gamma1_reduced(a22: f64, theta22: f64, gl: McComplex, gamma: *mut McComplex) -> McStatus {
    guard(|| {
        let g = netcalc::gamma1_reduced(a22, theta22, gl.into()).map_err(lib)?;
        *out(gamma, "gamma")? = g.into();
        Ok(())
    })
}

/// Switch-port `S22` that makes the two loaded states reflect in antiphase.
#[no_mangle]
pub unsafe extern "C" fn mc_solve_target(
    gl0: McComplex,
    gl1: McComplex,
    s22: *mut McComplex,
    a22: *mut f64,
    theta22: *mut f64,
) -> McStatus {
    guard(|| {
        let sol = netcalc::solve_target_s22(gl0.into(), gl1.into()).map_err(lib)?;
        *out(s22, "s22")? = sol.s22().into();
        if let Some(a) = a22.as_mut() {
            *a = sol.a22;
        }
        if let Some(t) = theta22.as_mut() {
            *t = sol.theta22;
        }
        Ok(())
    })
}

/// Parses 16 hex digits into genome bits.
#[no_mangle]
pub unsafe extern "C" fn mc_genome_parse(hex: *const c_char, bits: *mut u64) -> McStatus {
    guard(|| {
        if hex.is_null() {
            return Err(null("hex"));
        }
        let s = CStr::from_ptr(hex)
            .to_str()
            .map_err(|_| (McStatus::InvalidArgument, "genome is not UTF-8".to_string()))?;
        let g = Genome::unpack(s).map_err(lib)?;
        *out(bits, "bits")? = g.bits();
        Ok(())
    })
}

/// Writes the 16-digit hex form plus a terminating NUL; `len` must be at least 17.
#[no_mangle]
pub unsafe extern "C" fn mc_genome_format(bits: u64, buf: *mut c_char, len: usize) -> McStatus {
    guard(|| write_str(&Genome::from_bits(bits).pack(), buf, len))
}

unsafe fn write_str(s: &str, buf: *mut c_char, len: usize) -> Result<(), (McStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < s.len() + 1 {
        return Err((McStatus::BufferTooSmall, format!("need {} bytes, got {len}", s.len() + 1)));
    }
    ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

unsafe fn write_response(r: &oracle::SpectralResponse, dst: *mut McComplex, len: usize) -> Result<(), (McStatus, String)> {
    if dst.is_null() {
        return Err(null("out"));
    }
    if len < N_FREQ {
        return Err((McStatus::BufferTooSmall, format!("need {N_FREQ} values, got {len}")));
    }
    for (i, v) in r.values().iter().enumerate() {
        *dst.add(i) = (*v).into();
    }
    Ok(())
}

/// Oracle with the built-in constants and geometry.
#[no_mangle]
pub extern "C" fn mc_oracle_new() -> *mut McOracle {
    Box::into_raw(Box::new(McOracle {
        inner: Oracle::default(),
    }))
}

#[no_mangle]
pub unsafe extern "C" fn mc_oracle_free(o: *mut McOracle) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// 61-point `S22` of `bits` into `out` (at least `mc_n_freq()` entries).
#[no_mangle]
pub unsafe extern "C" fn mc_oracle_response(o: *const McOracle, bits: u64, dst: *mut McComplex, len: usize) -> McStatus {
    guard(|| {
        let o = o.as_ref().ok_or_else(|| null("oracle"))?;
        let r = o.inner.genome_response(Genome::from_bits(bits)).map_err(lib)?;
        write_response(&r, dst, len)
    })
}

/// Hex SHA-256 fingerprint of the oracle; `len` must be at least 65.
#[no_mangle]
pub unsafe extern "C" fn mc_oracle_fingerprint(o: *const McOracle, buf: *mut c_char, len: usize) -> McStatus {
    guard(|| {
        let o = o.as_ref().ok_or_else(|| null("oracle"))?;
        write_str(&o.inner.fingerprint(), buf, len)
    })
}

/// GA against the oracle over the grid band `[f_lo, f_hi]` with the built-in
/// PIN diode target. `population` and `generations` of 0 take the defaults.
#[no_mangle]
pub unsafe extern "C" fn mc_design_oracle(
    o: *const McOracle,
    f_lo: f64,
    f_hi: f64,
    population: usize,
    generations: usize,
    seed: u64,
    bits: *mut u64,
    fitness: *mut f64,
) -> McStatus {
    guard(|| {
        let o = o.as_ref().ok_or_else(|| null("oracle"))?;
        let target = build_target(Some((f_lo, f_hi)), &SwitchModel::pin_diode(), &[], 1.0).map_err(lib)?;
        let d = GaConfig::default();
        let cfg = GaConfig {
            population: if population == 0 { d.population } else { population },
            generations: if generations == 0 { d.generations } else { generations },
            seed,
            ..d
        };
        let r = ga_run(&cfg, &o.inner, &target, &[]).map_err(lib)?;
        *out(bits, "bits")? = r.best.bits();
        if let Some(f) = fitness.as_mut() {
            *f = r.best_fitness;
        }
        Ok(())
    })
}

/// Loads a surrogate checkpoint into `*model`.
#[no_mangle]
pub unsafe extern "C" fn mc_surrogate_load(path: *const c_char, model: *mut *mut McSurrogate) -> McStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let slot = out(model, "model")?;
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (McStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let m = SurrogateModel::load(Path::new(p)).map_err(lib)?;
        *slot = Box::into_raw(Box::new(McSurrogate { inner: m }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mc_surrogate_free(m: *mut McSurrogate) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Predicted 61-point `S22` of `bits`.
#[no_mangle]
pub unsafe extern "C" fn mc_surrogate_predict(m: *const McSurrogate, bits: u64, dst: *mut McComplex, len: usize) -> McStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let r = m.inner.predict(Genome::from_bits(bits)).map_err(lib)?;
        write_response(&r, dst, len)
    })
}
