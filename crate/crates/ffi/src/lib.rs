//! C ABI for the sliding-saddle solver.
//!
//! Fallible calls return an [`SsStatus`]. On failure a message is kept per
//! thread and read with [`ss_last_error`] until the next failing call.
//! Problems are opaque handles freed with [`ss_problem_free`]. Matrices are
//! row-major; `B` has `dim_y` rows and `dim_x` columns.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sliding_saddle::baselines::Method;
use sliding_saddle::bench::{load_problem, run_one, RunConfig, RunStatus, SolveMethod};
use sliding_saddle::instance_file::load_instance;
use sliding_saddle::numerics::Mat;
use sliding_saddle::oracles::Quadratic;
use sliding_saddle::saddle::{kkt_residual, ProblemParams, SaddlePointProblem};
use sliding_saddle::Error;

pub const SS_METHOD_SLIDING: u32 = 0;
pub const SS_METHOD_EXTRAGRADIENT: u32 = 1;
pub const SS_METHOD_GDA: u32 = 2;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    AssumptionViolation = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsRunStatus {
    Converged = 0,
    Diverged = 1,
    /// Iteration or restart budget exhausted.
    Stopped = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SsParams {
    pub l_x: f64,
    pub l_y: f64,
    pub l_xy: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_xy: f64,
    pub mu_yx: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SsCondition {
    pub delta_x: f64,
    pub delta_y: f64,
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_xy: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SsCounts {
    pub grad_f: u64,
    pub grad_g: u64,
    pub matvec_b: u64,
    pub matvec_bt: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsReport {
    pub status: SsRunStatus,
    /// Restarts for the sliding method, iterations for baselines.
    pub phases: usize,
    /// Final weighted squared distance to the solution set; NaN if unknown.
    pub final_r2: f64,
    pub exec_time: f64,
    pub counts: SsCounts,
}

/// Opaque problem handle.
pub struct SsProblem(SaddlePointProblem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::DimensionMismatch { .. } => SsStatus::DimensionMismatch,
        Error::AssumptionViolation(_) | Error::DegenerateProblem { .. } => SsStatus::AssumptionViolation,
        Error::Singular { .. } | Error::NonFinite(_) => SsStatus::Numerical,
        Error::Io(_) | Error::Csv(_) => SsStatus::Io,
        _ => SsStatus::InvalidArgument,
    }
}

fn fail(status: SsStatus, msg: impl Into<String>) -> SsStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), SsStatus>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift<T>(r: sliding_saddle::Result<T>) -> Result<T, SsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn nonnull<T>(p: *const T, name: &str) -> Result<(), SsStatus> {
    if p.is_null() {
        Err(fail(SsStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, SsStatus> {
    nonnull(p, name)?;
    CStr::from_ptr(p).to_str().map_err(|_| fail(SsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], SsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    nonnull(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn problem<'a>(p: *const SsProblem) -> Result<&'a SaddlePointProblem, SsStatus> {
    nonnull(p, "problem")?;
    Ok(&(*p).0)
}

unsafe fn emit(out: *mut *mut SsProblem, prob: SaddlePointProblem) {
    *out = Box::into_raw(Box::new(SsProblem(prob)));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Builds a named preset. Names match the command-line tool.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_preset(name: *const c_char, seed: u64, out: *mut *mut SsProblem) -> SsStatus {
    guard(|| {
        nonnull(out, "out")?;
        let name = c_str(name, "name")?;
        let prob = lift(load_problem(name, seed))?;
        emit(out, prob);
        Ok(())
    })
}

/// Loads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_load(path: *const c_char, out: *mut *mut SsProblem) -> SsStatus {
    guard(|| {
        nonnull(out, "out")?;
        let path = c_str(path, "path")?;
        let prob = lift(load_instance(Path::new(path)))?;
        emit(out, prob);
        Ok(())
    })
}

/// Builds `f(x) = ½xᵀH_f x + q_fᵀx`, `g(y) = ½yᵀH_g y + q_gᵀy` coupled by `B`.
///
/// # Safety
/// `h_f` holds `dim_x²` values, `q_f` `dim_x`, `h_g` `dim_y²`, `q_g`
/// `dim_y`, `b` `dim_y * dim_x`. `params` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_quadratic(
    dim_x: usize,
    dim_y: usize,
    h_f: *const f64,
    q_f: *const f64,
    h_g: *const f64,
    q_g: *const f64,
    b: *const f64,
    params: *const SsParams,
    out: *mut *mut SsProblem,
) -> SsStatus {
    guard(|| {
        nonnull(out, "out")?;
        nonnull(params, "params")?;
        if dim_x == 0 || dim_y == 0 {
            return Err(fail(SsStatus::InvalidArgument, "dimensions must be positive"));
        }
        let p = &*params;
        let pp = lift(ProblemParams::new(p.l_x, p.l_y, p.l_xy, p.mu_x, p.mu_y, p.mu_xy, p.mu_yx))?;
        let hf = lift(Mat::from_row_major(dim_x, dim_x, slice(h_f, dim_x * dim_x, "h_f")?.to_vec()))?;
        let hg = lift(Mat::from_row_major(dim_y, dim_y, slice(h_g, dim_y * dim_y, "h_g")?.to_vec()))?;
        let bm = lift(Mat::from_row_major(dim_y, dim_x, slice(b, dim_y * dim_x, "b")?.to_vec()))?;
        let f = lift(Quadratic::with_constants(hf, slice(q_f, dim_x, "q_f")?.to_vec(), p.l_x, p.mu_x))?;
        let g = lift(Quadratic::with_constants(hg, slice(q_g, dim_y, "q_g")?.to_vec(), p.l_y, p.mu_y))?;
        let prob = lift(SaddlePointProblem::new(Box::new(f), Box::new(g), Box::new(bm), pp))?;
        emit(out, prob);
        Ok(())
    })
}

/// Frees a handle. NULL is ignored.
///
/// # Safety
/// `p` must come from an `ss_problem_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_free(p: *mut SsProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle; `dim_x` and `dim_y` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_dims(p: *const SsProblem, dim_x: *mut usize, dim_y: *mut usize) -> SsStatus {
    guard(|| {
        let prob = problem(p)?;
        nonnull(dim_x, "dim_x")?;
        nonnull(dim_y, "dim_y")?;
        *dim_x = prob.dim_x();
        *dim_y = prob.dim_y();
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_params(p: *const SsProblem, out: *mut SsParams) -> SsStatus {
    guard(|| {
        let q = problem(p)?.params();
        nonnull(out, "out")?;
        *out = SsParams {
            l_x: q.l_x,
            l_y: q.l_y,
            l_xy: q.l_xy,
            mu_x: q.mu_x,
            mu_y: q.mu_y,
            mu_xy: q.mu_xy,
            mu_yx: q.mu_yx,
        };
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_problem_condition(p: *const SsProblem, out: *mut SsCondition) -> SsStatus {
    guard(|| {
        let cn = lift(problem(p)?.condition_numbers())?;
        nonnull(out, "out")?;
        *out = SsCondition {
            delta_x: cn.delta_x,
            delta_y: cn.delta_y,
            kappa_x: cn.kappa_x,
            kappa_y: cn.kappa_y,
            kappa_xy: cn.kappa_xy,
        };
        Ok(())
    })
}

/// Solves from the origin until the squared distance to the solution set
/// drops to `eps` times its initial value. `max_iters` bounds baseline
/// iterations and is ignored by the sliding method. `x`, `y` and `report`
/// may be NULL when not wanted.
///
/// # Safety
/// `p` must be a live handle. Non-null `x` and `y` hold `x_len` and
/// `y_len` values, which must equal the problem dimensions.
#[no_mangle]
pub unsafe extern "C" fn ss_solve(
    p: *const SsProblem,
    method: u32,
    eps: f64,
    max_iters: usize,
    x: *mut f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
    report: *mut SsReport,
) -> SsStatus {
    guard(|| {
        let prob = problem(p)?;
        let method = match method {
            SS_METHOD_SLIDING => SolveMethod::Sliding,
            SS_METHOD_EXTRAGRADIENT => SolveMethod::Baseline(Method::Extragradient),
            SS_METHOD_GDA => SolveMethod::Baseline(Method::Gda),
            m => return Err(fail(SsStatus::InvalidArgument, format!("unknown method {m}"))),
        };
        if !x.is_null() && x_len != prob.dim_x() {
            return Err(fail(SsStatus::DimensionMismatch, format!("x_len {x_len}, expected {}", prob.dim_x())));
        }
        if !y.is_null() && y_len != prob.dim_y() {
            return Err(fail(SsStatus::DimensionMismatch, format!("y_len {y_len}, expected {}", prob.dim_y())));
        }
        let mut cfg = lift(RunConfig::new(method, eps))?;
        cfg.max_iters = max_iters;
        let res = lift(run_one(prob, &cfg))?;
        if !x.is_null() {
            std::slice::from_raw_parts_mut(x, x_len).copy_from_slice(&res.x);
        }
        if !y.is_null() {
            std::slice::from_raw_parts_mut(y, y_len).copy_from_slice(&res.y);
        }
        if !report.is_null() {
            let c = res.counts;
            *report = SsReport {
                status: match res.status {
                    RunStatus::Converged => SsRunStatus::Converged,
                    RunStatus::Diverged => SsRunStatus::Diverged,
                    RunStatus::Stopped => SsRunStatus::Stopped,
                },
                phases: res.trace.len().saturating_sub(1),
                final_r2: res.final_r2().unwrap_or(f64::NAN),
                exec_time: res.exec_time,
                counts: SsCounts { grad_f: c.grad_f, grad_g: c.grad_g, matvec_b: c.matvec_b, matvec_bt: c.matvec_bt },
            };
        }
        Ok(())
    })
}

/// Norm of the saddle operator at `(x, y)`.
///
/// # Safety
/// `p` must be a live handle, `x` and `y` hold `x_len` and `y_len` values,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_kkt_residual(
    p: *const SsProblem,
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let prob = problem(p)?;
        nonnull(out, "out")?;
        if x_len != prob.dim_x() || y_len != prob.dim_y() {
            return Err(fail(
                SsStatus::DimensionMismatch,
                format!("got ({x_len}, {y_len}), expected ({}, {})", prob.dim_x(), prob.dim_y()),
            ));
        }
        *out = kkt_residual(prob, slice(x, x_len, "x")?, slice(y, y_len, "y")?);
        Ok(())
    })
}
