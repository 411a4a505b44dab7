//! C interface to the peer-adjoint library.
//!
//! Every function returns a [`PaStatus`]; results travel through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free`. A failed call leaves out pointers untouched and records a message
//! retrievable with [`pa_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use peer_adjoint::kkt::{kkt_residual, solve_kkt, DiscreteSolution, KktOptions};
use peer_adjoint::method::{builtin_by_name, load_suite, PeerMethodSuite};
use peer_adjoint::problems::{problem_by_name, van_der_pol, ProblemSpec};
use peer_adjoint::stability::alpha_angle;
use peer_adjoint::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownName = 3,
    Parse = 4,
    Numerical = 5,
    NoConvergence = 6,
    OutOfRange = 7,
    Io = 8,
    Panic = 9,
}

/// Method coefficients (start, standard and end sets).
pub struct PaSuite(PeerMethodSuite);

/// Boundary value problem of the eliminated optimality system.
pub struct PaProblem(ProblemSpec);

/// Converged discrete state and adjoint.
pub struct PaSolution(DiscreteSolution);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> PaStatus {
    match err {
        Error::UnknownMethod(_) | Error::UnknownProblem(_) => PaStatus::UnknownName,
        Error::Parse { .. } => PaStatus::Parse,
        Error::NoConvergence(_) | Error::NewtonDivergence(_) | Error::ReferenceNotConverged(_) => {
            PaStatus::NoConvergence
        }
        Error::InvalidArgument(_)
        | Error::NonpositiveEpsilon(_)
        | Error::DimensionMismatch(_)
        | Error::DegenerateNodes(_)
        | Error::InvariantViolation(_) => PaStatus::InvalidArgument,
        Error::Io(_) => PaStatus::Io,
        _ => PaStatus::Numerical,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard<F>(body: F) -> PaStatus
where
    F: FnOnce() -> Result<(), (PaStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PaStatus::Panic
        }
    }
}

fn lib<T>(r: peer_adjoint::Result<T>) -> Result<T, (PaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PaStatus, String) {
    (PaStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PaStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (PaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or valid for reads.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PaStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn emit<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), (PaStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `cap > 0`) and returns its full length in bytes
/// excluding the terminator.
///
/// # Safety
/// `buf` is null or valid for `cap` byte writes.
#[no_mangle]
pub unsafe extern "C" fn pa_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Built-in method by name (`BDF3o22`, `BDF3o32`, `PEER3o32w`).
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_suite_builtin(name: *const c_char, out: *mut *mut PaSuite) -> PaStatus {
    guard(|| {
        let name = text(name, "name")?;
        let suite = lib(builtin_by_name(name))?;
        emit(out, PaSuite(suite), "out")
    })
}

/// Method read from a coefficient file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_suite_from_file(
    path: *const c_char,
    out: *mut *mut PaSuite,
) -> PaStatus {
    guard(|| {
        let path = text(path, "path")?;
        let suite = lib(load_suite(Path::new(path)))?;
        emit(out, PaSuite(suite), "out")
    })
}

/// # Safety
/// `suite` is null or a handle from this library; `stages` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_suite_stages(suite: *const PaSuite, stages: *mut usize) -> PaStatus {
    guard(|| {
        let suite = handle(suite, "suite")?;
        let stages = stages.as_mut().ok_or_else(|| null("stages"))?;
        *stages = suite.0.stages();
        Ok(())
    })
}

/// A(α) angle in degrees of the standard set, from `n_theta` samples.
///
/// # Safety
/// `suite` is a handle from this library; `degrees` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_suite_alpha_angle(
    suite: *const PaSuite,
    n_theta: usize,
    degrees: *mut f64,
) -> PaStatus {
    guard(|| {
        let suite = handle(suite, "suite")?;
        let degrees = degrees.as_mut().ok_or_else(|| null("degrees"))?;
        *degrees = lib(alpha_angle(&suite.0.standard, n_theta))?;
        Ok(())
    })
}

/// # Safety
/// `suite` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pa_suite_free(suite: *mut PaSuite) {
    if !suite.is_null() {
        drop(Box::from_raw(suite));
    }
}

/// Benchmark problem by name (`rayleigh`, `van_der_pol`) with defaults.
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_problem_by_name(
    name: *const c_char,
    out: *mut *mut PaProblem,
) -> PaStatus {
    guard(|| {
        let name = text(name, "name")?;
        let spec = lib(problem_by_name(name))?;
        emit(out, PaProblem(spec), "out")
    })
}

/// Van der Pol problem with stiffness parameter `epsilon > 0`.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_problem_van_der_pol(
    epsilon: f64,
    out: *mut *mut PaProblem,
) -> PaStatus {
    guard(|| {
        let spec = lib(van_der_pol(epsilon))?;
        emit(out, PaProblem(spec), "out")
    })
}

/// # Safety
/// `problem` is a handle from this library; `dim` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_problem_dim(problem: *const PaProblem, dim: *mut usize) -> PaStatus {
    guard(|| {
        let problem = handle(problem, "problem")?;
        let dim = dim.as_mut().ok_or_else(|| null("dim"))?;
        *dim = problem.0.problem.dim();
        Ok(())
    })
}

/// # Safety
/// `problem` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pa_problem_free(problem: *mut PaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves the coupled forward/adjoint system on `n + 1` steps with the
/// default solver options.
///
/// # Safety
/// `suite`, `problem` are handles from this library; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_solve(
    suite: *const PaSuite,
    problem: *const PaProblem,
    n: usize,
    out: *mut *mut PaSolution,
) -> PaStatus {
    guard(|| {
        let suite = handle(suite, "suite")?;
        let problem = handle(problem, "problem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = lib(solve_kkt(
            &suite.0,
            problem.0.problem.as_ref(),
            n,
            &KktOptions::default(),
        ))?;
        emit(out, PaSolution(sol), "out")
    })
}

/// Number of steps (`N + 1`), stages and state dimension.
///
/// # Safety
/// `solution` is a handle from this library; the out pointers are valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn pa_solution_shape(
    solution: *const PaSolution,
    steps: *mut usize,
    stages: *mut usize,
    dim: *mut usize,
) -> PaStatus {
    guard(|| {
        let sol = &handle(solution, "solution")?.0;
        let (steps, stages, dim) = match (steps.as_mut(), stages.as_mut(), dim.as_mut()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(null("shape output")),
        };
        *steps = sol.grid.steps();
        *stages = sol.s;
        *dim = sol.m;
        Ok(())
    })
}

#[derive(Clone, Copy)]
enum Field {
    State,
    Adjoint,
}

unsafe fn copy_stage(
    solution: *const PaSolution,
    field: Field,
    step: usize,
    stage: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> PaStatus {
    guard(|| {
        let sol = &handle(solution, "solution")?.0;
        if values.is_null() {
            return Err(null("values"));
        }
        if step >= sol.grid.steps() || stage >= sol.s {
            return Err((
                PaStatus::OutOfRange,
                format!(
                    "stage ({step}, {stage}) outside {} x {}",
                    sol.grid.steps(),
                    sol.s
                ),
            ));
        }
        if len < sol.m {
            return Err((
                PaStatus::InvalidArgument,
                format!("buffer holds {len} values, need {}", sol.m),
            ));
        }
        let src = match field {
            Field::State => sol.y_stage(step, stage),
            Field::Adjoint => sol.p_stage(step, stage),
        };
        ptr::copy_nonoverlapping(src.as_ptr(), values, sol.m);
        if let Some(t) = time.as_mut() {
            *t = sol.stage_time(step, stage);
        }
        Ok(())
    })
}

/// State at stage `stage` of step `step`; `time` (may be null) receives the
/// stage time.
///
/// # Safety
/// `solution` is a handle from this library; `values` is valid for `len`
/// writes; `time` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_solution_state(
    solution: *const PaSolution,
    step: usize,
    stage: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> PaStatus {
    copy_stage(solution, Field::State, step, stage, time, values, len)
}

/// Adjoint at stage `stage` of step `step`.
///
/// # Safety
/// As [`pa_solution_state`].
#[no_mangle]
pub unsafe extern "C" fn pa_solution_adjoint(
    solution: *const PaSolution,
    step: usize,
    stage: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> PaStatus {
    copy_stage(solution, Field::Adjoint, step, stage, time, values, len)
}

/// Final state `y_h(T)` and initial adjoint `p_h(0)`; each buffer holds `len`
/// values.
///
/// # Safety
/// `solution` is a handle from this library; both buffers are valid for
/// `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pa_solution_boundary(
    solution: *const PaSolution,
    y_final: *mut f64,
    p_initial: *mut f64,
    len: usize,
) -> PaStatus {
    guard(|| {
        let sol = &handle(solution, "solution")?.0;
        if y_final.is_null() || p_initial.is_null() {
            return Err(null("boundary output"));
        }
        if len < sol.m {
            return Err((
                PaStatus::InvalidArgument,
                format!("buffer holds {len} values, need {}", sol.m),
            ));
        }
        ptr::copy_nonoverlapping(sol.yh_t.as_ptr(), y_final, sol.m);
        ptr::copy_nonoverlapping(sol.ph_0.as_ptr(), p_initial, sol.m);
        Ok(())
    })
}

/// Largest residual over all equation groups, re-evaluated from the stored
/// solution.
///
/// # Safety
/// `suite`, `problem`, `solution` are handles from this library (the same
/// suite and problem used to solve); `residual` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_solution_residual(
    suite: *const PaSuite,
    problem: *const PaProblem,
    solution: *const PaSolution,
    residual: *mut f64,
) -> PaStatus {
    guard(|| {
        let suite = handle(suite, "suite")?;
        let problem = handle(problem, "problem")?;
        let sol = handle(solution, "solution")?;
        let residual = residual.as_mut().ok_or_else(|| null("residual"))?;
        *residual = lib(kkt_residual(&suite.0, problem.0.problem.as_ref(), &sol.0))?.max();
        Ok(())
    })
}

/// # Safety
/// `solution` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pa_solution_free(solution: *mut PaSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
