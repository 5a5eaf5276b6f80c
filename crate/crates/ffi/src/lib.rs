//! C interface to the dgswe solver.
//!
//! Every function returns a [`DgsweStatus`]; on failure the message is
//! available from [`dgswe_last_error`] on the calling thread. Solvers are
//! opaque handles created by [`dgswe_solver_new`] and released with
//! [`dgswe_solver_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use dgswe::cases::{CaseConfig, CaseId};
use dgswe::sim::{AlphaChoice, Simulation};
use dgswe::time::StepSize;
use dgswe::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgsweStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The solution became non-finite or lost positivity.
    Diverged = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgsweCase {
    AdvectionSine = 0,
    GeostrophicAdjustment = 1,
    WilliamsonTc2 = 2,
    WilliamsonTc6 = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgsweAlpha {
    Local = 0,
    Global = 1,
}

/// Run parameters. Exactly one of `dt` and `courant` must be positive.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgsweConfig {
    pub case_id: DgsweCase,
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
    pub p: u32,
    pub rk: u32,
    /// Fixed time step in seconds, or `0`.
    pub dt: f64,
    /// Courant number, or `0`.
    pub courant: f64,
    pub t_final: f64,
    pub alpha: DgsweAlpha,
}

/// Opaque solver handle.
pub struct DgsweSolver {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> DgsweStatus {
    match err {
        Error::Divergence { .. } | Error::Model(_) => DgsweStatus::Diverged,
        Error::Io { .. } => DgsweStatus::Io,
        Error::Config(_) | Error::Field(_) | Error::Basis(_) => DgsweStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (DgsweStatus, String)>) -> DgsweStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DgsweStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&format!("internal error: {msg}"));
            DgsweStatus::Panic
        }
    }
}

fn fail(err: Error) -> (DgsweStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (DgsweStatus, String) {
    (DgsweStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: String) -> (DgsweStatus, String) {
    (DgsweStatus::InvalidArgument, msg)
}

fn case_id(c: DgsweCase) -> CaseId {
    match c {
        DgsweCase::AdvectionSine => CaseId::AdvectionSine,
        DgsweCase::GeostrophicAdjustment => CaseId::GeostrophicAdjustment,
        DgsweCase::WilliamsonTc2 => CaseId::WilliamsonTc2,
        DgsweCase::WilliamsonTc6 => CaseId::WilliamsonTc6,
    }
}

fn case_config(c: &DgsweConfig) -> Result<CaseConfig, (DgsweStatus, String)> {
    let mut cfg = CaseConfig::defaults(case_id(c.case_id));
    cfg.nx = c.nx as usize;
    cfg.ny = c.ny as usize;
    cfg.nz = c.nz as usize;
    cfg.p = c.p as usize;
    cfg.rk = c.rk as usize;
    cfg.step = match (c.dt > 0.0, c.courant > 0.0) {
        (true, false) => StepSize::Fixed(c.dt),
        (false, true) => StepSize::Courant(c.courant),
        _ => {
            return Err(invalid(format!(
                "exactly one of dt ({}) and courant ({}) must be positive",
                c.dt, c.courant
            )))
        }
    };
    if !(c.t_final >= 0.0 && c.t_final.is_finite()) {
        return Err(invalid(format!("invalid final time {}", c.t_final)));
    }
    if cfg.nx == 0 || cfg.ny == 0 || cfg.nz == 0 {
        return Err(invalid("mesh sizes must be positive".into()));
    }
    cfg.t_final = c.t_final;
    Ok(cfg)
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dgswe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Writes the default parameters of `case` into `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `DgsweConfig`.
#[no_mangle]
pub unsafe extern "C" fn dgswe_config_default(case: DgsweCase, out: *mut DgsweConfig) -> DgsweStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = CaseConfig::defaults(case_id(case));
        let (dt, courant) = match cfg.step {
            StepSize::Fixed(dt) => (dt, 0.0),
            StepSize::Courant(c) => (0.0, c),
        };
        let c = DgsweConfig {
            case_id: case,
            nx: cfg.nx as u32,
            ny: cfg.ny as u32,
            nz: cfg.nz as u32,
            p: cfg.p as u32,
            rk: cfg.rk as u32,
            dt,
            courant,
            t_final: cfg.t_final,
            alpha: DgsweAlpha::Local,
        };
        // SAFETY: checked non-null; the caller guarantees it is writable.
        unsafe { out.write(c) };
        Ok(())
    })
}

/// Builds a solver with the projected initial state at `t = 0`.
///
/// # Safety
/// `config` must be null or point to a valid `DgsweConfig`; `out` must be
/// null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_new(config: *const DgsweConfig, out: *mut *mut DgsweSolver) -> DgsweStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; the caller guarantees validity.
        let c = unsafe { &*config };
        let cfg = case_config(c)?;
        let alpha = match c.alpha {
            DgsweAlpha::Local => AlphaChoice::Local,
            DgsweAlpha::Global => AlphaChoice::Global,
        };
        let sim = Simulation::new(cfg, alpha).map_err(fail)?;
        let handle = Box::into_raw(Box::new(DgsweSolver { sim }));
        // SAFETY: checked non-null.
        unsafe { out.write(handle) };
        Ok(())
    })
}

/// Releases a solver. Null is ignored.
///
/// # Safety
/// `solver` must be null or a handle from [`dgswe_solver_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_free(solver: *mut DgsweSolver) {
    if !solver.is_null() {
        // SAFETY: the caller guarantees the handle is live and owned.
        drop(unsafe { Box::from_raw(solver) });
    }
}

/// # Safety
/// `solver` must be null or a live handle.
unsafe fn solver_ref<'a>(solver: *const DgsweSolver) -> Result<&'a DgsweSolver, (DgsweStatus, String)> {
    // SAFETY: forwarded from the caller.
    unsafe { solver.as_ref() }.ok_or_else(|| null("solver"))
}

/// # Safety
/// `solver` must be null or a live handle not aliased elsewhere.
unsafe fn solver_mut<'a>(solver: *mut DgsweSolver) -> Result<&'a mut DgsweSolver, (DgsweStatus, String)> {
    // SAFETY: forwarded from the caller.
    unsafe { solver.as_mut() }.ok_or_else(|| null("solver"))
}

/// # Safety
/// `out` must be null or writable.
unsafe fn put<T>(out: *mut T, v: T) -> Result<(), (DgsweStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; writability is the caller's contract.
    unsafe { out.write(v) };
    Ok(())
}

/// Takes `n` steps of the configured size.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_step(solver: *mut DgsweSolver, n: u64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_mut(solver) }?;
        for _ in 0..n {
            s.sim.step().map_err(fail)?;
        }
        Ok(())
    })
}

/// Steps to time `t`, shortening the last step to land on it.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_advance_to(solver: *mut DgsweSolver, t: f64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_mut(solver) }?;
        if !t.is_finite() || t < s.sim.time() {
            return Err(invalid(format!(
                "target time {t} is before the current time {}",
                s.sim.time()
            )));
        }
        s.sim.advance_to(t, |_, _| Ok(())).map_err(fail)
    })
}

/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_time(solver: *const DgsweSolver, out: *mut f64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        unsafe { put(out, s.sim.time()) }
    })
}

/// Number of steps taken so far.
///
/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_steps(solver: *const DgsweSolver, out: *mut u64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        unsafe { put(out, s.sim.steps() as u64) }
    })
}

/// The configured time step in seconds.
///
/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_dt(solver: *const DgsweSolver, out: *mut f64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        unsafe { put(out, s.sim.dt()) }
    })
}

/// Number of conserved variables.
///
/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_n_vars(solver: *const DgsweSolver, out: *mut u32) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        unsafe { put(out, s.sim.config().n_vars() as u32) }
    })
}

fn check_var(s: &DgsweSolver, var: u32) -> Result<usize, (DgsweStatus, String)> {
    let nv = s.sim.config().n_vars();
    if (var as usize) < nv {
        Ok(var as usize)
    } else {
        Err(invalid(format!("variable {var} out of range (0..{nv})")))
    }
}

/// Integral of variable `var` over the domain (`cos θ` weighted on the
/// sphere).
///
/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_mass(solver: *const DgsweSolver, var: u32, out: *mut f64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        let v = check_var(s, var)?;
        unsafe { put(out, s.sim.mass(v)) }
    })
}

/// L2 error of variable `var` against the exact solution. Fails with
/// `INVALID_ARGUMENT` for cases without one.
///
/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_l2_error(solver: *const DgsweSolver, var: u32, out: *mut f64) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        let v = check_var(s, var)?;
        match s.sim.l2_error_exact(v).map_err(fail)? {
            Some(e) => unsafe { put(out, e) },
            None => Err(invalid(format!("case {} has no exact solution", s.sim.config().case))),
        }
    })
}

/// Value of variable `var` at `(x, y)`; `(λ, θ)` in radians on the sphere.
///
/// # Safety
/// `solver` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_sample(
    solver: *const DgsweSolver,
    var: u32,
    x: f64,
    y: f64,
    out: *mut f64,
) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        let v = check_var(s, var)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(invalid(format!("non-finite sample point ({x}, {y})")));
        }
        unsafe { put(out, s.sim.sample(v, x, y)) }
    })
}

/// Writes a field dump at the default resolution to `path` (UTF-8).
///
/// # Safety
/// `solver` must be null or a live handle; `path` null or a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn dgswe_solver_export(solver: *const DgsweSolver, path: *const c_char) -> DgsweStatus {
    guard(|| {
        let s = unsafe { solver_ref(solver) }?;
        if path.is_null() {
            return Err(null("path"));
        }
        // SAFETY: checked non-null; NUL termination is the caller's contract.
        let p = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|e| invalid(format!("path is not UTF-8: {e}")))?;
        s.sim.export(Path::new(p), s.sim.default_resolution()).map_err(fail)
    })
}
