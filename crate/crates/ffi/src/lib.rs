//! C interface to `momograd`.
//!
//! Objects are opaque heap handles created by `mg_*_new` / `mg_solve` and
//! released with the matching `mg_*_free`. Fallible calls return an
//! [`MgStatus`]; the message of the last failure on the calling thread is
//! available from [`mg_last_error`]. Arrays are caller-owned and passed as a
//! pointer plus element count. Jacobians are row-major, one row per objective.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::OnceLock;

use momograd::bench;
use momograd::directions::GammaRule;
use momograd::linesearch::InitMode;
use momograd::mo_core::Problem;
use momograd::problems::registry_specs;
use momograd::{lookup, Error, Method, SolverConfig, SolverTrace, TerminalStatus, TestProblem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    DimensionMismatch = 4,
    InvalidConfig = 5,
    EvalError = 6,
    IndexOutOfRange = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgMethod {
    MmgI = 0,
    MmgIi = 1,
    Sd = 2,
    Fr = 3,
    Cd = 4,
    Hs = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgTerminal {
    Critical = 0,
    MaxIters = 1,
    LineSearchFail = 2,
    EvalError = 3,
    DescentFailure = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgGammaRule {
    Constant = 0,
    Bb = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgInitMode {
    Unit = 0,
    TauK = 1,
}

/// A registered test problem.
pub struct MgProblem {
    inner: TestProblem,
}

/// Solver settings. Starts from the defaults of the chosen method.
pub struct MgConfig {
    inner: SolverConfig,
}

/// Result of one solver run.
pub struct MgTrace {
    inner: SolverTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let c = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: MgStatus, msg: impl std::fmt::Display) -> MgStatus {
    set_error(msg);
    status
}

fn from_core(err: &Error) -> MgStatus {
    let status = match err {
        Error::DimensionMismatch { .. } => MgStatus::DimensionMismatch,
        Error::InvalidConfig(_) => MgStatus::InvalidConfig,
        Error::UnknownProblem(_) => MgStatus::UnknownProblem,
        Error::NonFinite { .. } | Error::LineSearchFailure { .. } | Error::NotDescent { .. } => {
            MgStatus::EvalError
        }
    };
    fail(status, err)
}

fn guard(f: impl FnOnce() -> MgStatus) -> MgStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(MgStatus::Panic, "internal panic"))
}

unsafe fn input<'a>(p: *const f64, len: usize) -> Result<&'a [f64], MgStatus> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(fail(MgStatus::NullPointer, "null input array"))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

unsafe fn output<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], MgStatus> {
    if len == 0 {
        Ok(&mut [])
    } else if p.is_null() {
        Err(fail(MgStatus::NullPointer, "null output array"))
    } else {
        Ok(slice::from_raw_parts_mut(p, len))
    }
}

fn copy_out(src: &[f64], dst: &mut [f64]) -> Result<(), MgStatus> {
    if src.len() != dst.len() {
        return Err(fail(
            MgStatus::DimensionMismatch,
            format!("output holds {} values, {} needed", dst.len(), src.len()),
        ));
    }
    dst.copy_from_slice(src);
    Ok(())
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! handle {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(h) => h,
            None => return fail(MgStatus::NullPointer, "null handle"),
        }
    };
}

macro_rules! handle_mut {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(h) => h,
            None => return fail(MgStatus::NullPointer, "null handle"),
        }
    };
}

/// Message of the last failed call on this thread. Empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mg_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).unwrap()).as_ptr()
}

fn names() -> &'static [CString] {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES.get_or_init(|| registry_specs().into_iter().map(|s| CString::new(s.name).unwrap()).collect())
}

/// Number of registered problems.
#[no_mangle]
pub extern "C" fn mg_problem_count() -> usize {
    names().len()
}

/// Name of the `index`-th registered problem, or null when out of range.
#[no_mangle]
pub extern "C" fn mg_problem_name(index: usize) -> *const c_char {
    names().get(index).map_or(ptr::null(), |n| n.as_ptr())
}

/// Looks up a problem by name (case-insensitive).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_new(name: *const c_char, out: *mut *mut MgProblem) -> MgStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            return fail(MgStatus::NullPointer, "null argument");
        }
        let name = match CStr::from_ptr(name).to_str() {
            Ok(s) => s,
            Err(_) => return fail(MgStatus::InvalidArgument, "problem name is not UTF-8"),
        };
        match lookup(name) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(MgProblem { inner: p }));
                MgStatus::Ok
            }
            Err(e) => from_core(&e),
        }
    })
}

/// # Safety
/// `problem` must come from [`mg_problem_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_free(problem: *mut MgProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of variables; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_dim(problem: *const MgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Number of objectives; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_num_objectives(problem: *const MgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.num_objectives())
}

/// Sampling box of the problem. Both arrays hold `n` values.
///
/// # Safety
/// `lower` and `upper` must each point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_bounds(
    problem: *const MgProblem,
    lower: *mut f64,
    upper: *mut f64,
    n: usize,
) -> MgStatus {
    guard(|| {
        let p = handle!(problem);
        let spec = p.inner.spec();
        tri!(copy_out(&spec.lower, tri!(output(lower, n))));
        tri!(copy_out(&spec.upper, tri!(output(upper, n))));
        MgStatus::Ok
    })
}

/// Objective values at `x` (length `n`) into `f` (length `m`).
///
/// # Safety
/// Arrays must hold the stated number of doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_eval(
    problem: *const MgProblem,
    x: *const f64,
    n: usize,
    f: *mut f64,
    m: usize,
) -> MgStatus {
    guard(|| {
        let p = handle!(problem);
        let x = tri!(input(x, n));
        if n != p.inner.dim() {
            return from_core(&Error::DimensionMismatch { expected: p.inner.dim(), actual: n });
        }
        tri!(copy_out(&p.inner.values(x), tri!(output(f, m))));
        MgStatus::Ok
    })
}

/// Row-major Jacobian at `x` into `jac` (length `m * n`).
///
/// # Safety
/// Arrays must hold the stated number of doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_jacobian(
    problem: *const MgProblem,
    x: *const f64,
    n: usize,
    jac: *mut f64,
    len: usize,
) -> MgStatus {
    guard(|| {
        let p = handle!(problem);
        let x = tri!(input(x, n));
        if n != p.inner.dim() {
            return from_core(&Error::DimensionMismatch { expected: p.inner.dim(), actual: n });
        }
        let j = p.inner.jacobian(x);
        let flat: Vec<f64> = j.rows().flatten().copied().collect();
        tri!(copy_out(&flat, tri!(output(jac, len))));
        MgStatus::Ok
    })
}

/// Uniform start points from the problem's box, `count` rows of `dim`
/// values, reproducible from `seed`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_problem_sample_starts(
    problem: *const MgProblem,
    count: usize,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> MgStatus {
    guard(|| {
        let p = handle!(problem);
        let flat: Vec<f64> = momograd::problems::sample_starts(p.inner.spec(), count, seed)
            .into_iter()
            .flatten()
            .collect();
        tri!(copy_out(&flat, tri!(output(out, len))));
        MgStatus::Ok
    })
}

/// New configuration with the defaults of `method`. The memory gradient
/// defaults are `N = 5` with constant `γ`.
#[no_mangle]
pub extern "C" fn mg_config_new(method: MgMethod) -> *mut MgConfig {
    let inner = match method {
        MgMethod::MmgI => bench::mmg_i1().config,
        MgMethod::MmgIi => {
            let mut c = bench::mmg_i1().config;
            c.method = Method::MmgII;
            c
        }
        MgMethod::Sd => SolverConfig::with_method(Method::Sd),
        MgMethod::Fr => SolverConfig::with_method(Method::Fr),
        MgMethod::Cd => SolverConfig::with_method(Method::Cd),
        MgMethod::Hs => SolverConfig::with_method(Method::Hs),
    };
    Box::into_raw(Box::new(MgConfig {
        inner: SolverConfig { record_vectors: false, ..inner },
    }))
}

/// # Safety
/// `config` must come from [`mg_config_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mg_config_free(config: *mut MgConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Number of stored directions `N`.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_memory(config: *mut MgConfig, memory: usize) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.mmg.memory = memory;
    MgStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_gamma_rule(config: *mut MgConfig, rule: MgGammaRule) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.mmg.gamma_rule = match rule {
        MgGammaRule::Constant => GammaRule::Constant,
        MgGammaRule::Bb => GammaRule::Bb,
    };
    MgStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_zeta(config: *mut MgConfig, zeta: f64) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.mmg.zeta = zeta;
    MgStatus::Ok
}

/// Armijo constant and backtracking factor.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_armijo(config: *mut MgConfig, rho: f64, delta: f64) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.ls.rho = rho;
    c.inner.ls.delta = delta;
    MgStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_init_mode(config: *mut MgConfig, mode: MgInitMode) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.ls.init_mode = match mode {
        MgInitMode::Unit => InitMode::Unit,
        MgInitMode::TauK => InitMode::TauK,
    };
    MgStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_eps_theta(config: *mut MgConfig, eps: f64) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.eps_theta = eps;
    MgStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_max_iters(config: *mut MgConfig, max_iters: usize) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.max_iters = max_iters;
    MgStatus::Ok
}

/// Jacobian Lipschitz constant used by `MG_METHOD_MMG_II`. A NaN clears it.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_lipschitz(config: *mut MgConfig, lipschitz: f64) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.ls.lipschitz = (!lipschitz.is_nan()).then_some(lipschitz);
    MgStatus::Ok
}

/// Keep per-iteration vectors; off by default.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_record_vectors(config: *mut MgConfig, on: bool) -> MgStatus {
    let c = handle_mut!(config);
    c.inner.record_vectors = on;
    MgStatus::Ok
}

/// Runs the solver from `x0`. Returns `MG_STATUS_OK` whenever a trace was
/// produced, whatever its terminal status; the trace goes to `*out`.
///
/// # Safety
/// Handles must be live, `x0` must hold `n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_solve(
    problem: *const MgProblem,
    config: *const MgConfig,
    x0: *const f64,
    n: usize,
    out: *mut *mut MgTrace,
) -> MgStatus {
    guard(|| {
        let p = handle!(problem);
        let c = handle!(config);
        if out.is_null() {
            return fail(MgStatus::NullPointer, "null output handle");
        }
        let x0 = tri!(input(x0, n));
        match momograd::solve(&p.inner, x0, &c.inner) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(MgTrace { inner: t }));
                MgStatus::Ok
            }
            Err(e) => from_core(&e),
        }
    })
}

/// # Safety
/// `trace` must come from [`mg_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_free(trace: *mut MgTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_status(trace: *const MgTrace, out: *mut MgTerminal) -> MgStatus {
    let t = handle!(trace);
    if out.is_null() {
        return fail(MgStatus::NullPointer, "null output");
    }
    *out = match t.inner.status {
        TerminalStatus::Critical => MgTerminal::Critical,
        TerminalStatus::MaxIters => MgTerminal::MaxIters,
        TerminalStatus::LineSearchFail => MgTerminal::LineSearchFail,
        TerminalStatus::EvalError => MgTerminal::EvalError,
        TerminalStatus::DescentFailure => MgTerminal::DescentFailure,
    };
    MgStatus::Ok
}

/// Iterations, objective evaluations and Jacobian evaluations. Any output
/// pointer may be null.
///
/// # Safety
/// `trace` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_counts(
    trace: *const MgTrace,
    iterations: *mut usize,
    f_evals: *mut usize,
    jac_evals: *mut usize,
) -> MgStatus {
    let t = &handle!(trace).inner;
    for (p, v) in [(iterations, t.iterations), (f_evals, t.f_evals), (jac_evals, t.jac_evals)] {
        if let Some(p) = p.as_mut() {
            *p = v;
        }
    }
    MgStatus::Ok
}

/// Criticality measure and `‖v‖∞` at the final iterate. Either output may
/// be null.
///
/// # Safety
/// `trace` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_criticality(
    trace: *const MgTrace,
    theta: *mut f64,
    v_norm: *mut f64,
) -> MgStatus {
    let t = &handle!(trace).inner;
    if let Some(p) = theta.as_mut() {
        *p = t.final_theta;
    }
    if let Some(p) = v_norm.as_mut() {
        *p = t.final_v_norm;
    }
    MgStatus::Ok
}

/// Final iterate into `x` (length `n`).
///
/// # Safety
/// `x` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_final_x(trace: *const MgTrace, x: *mut f64, n: usize) -> MgStatus {
    guard(|| {
        let t = handle!(trace);
        tri!(copy_out(&t.inner.final_x, tri!(output(x, n))));
        MgStatus::Ok
    })
}

/// Objective values at the final iterate into `f` (length `m`).
///
/// # Safety
/// `f` must hold `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_final_f(trace: *const MgTrace, f: *mut f64, m: usize) -> MgStatus {
    guard(|| {
        let t = handle!(trace);
        tri!(copy_out(&t.inner.final_f, tri!(output(f, m))));
        MgStatus::Ok
    })
}

/// Step size and criticality measure of iteration `k`.
///
/// # Safety
/// `trace` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_trace_record(
    trace: *const MgTrace,
    k: usize,
    alpha: *mut f64,
    theta: *mut f64,
) -> MgStatus {
    let t = handle!(trace);
    let Some(r) = t.inner.records.get(k) else {
        return fail(
            MgStatus::IndexOutOfRange,
            format!("iteration {k} of {}", t.inner.records.len()),
        );
    };
    if let Some(p) = alpha.as_mut() {
        *p = r.alpha;
    }
    if let Some(p) = theta.as_mut() {
        *p = r.theta;
    }
    MgStatus::Ok
}

unsafe fn points(data: *const f64, count: usize, m: usize) -> Result<Vec<Vec<f64>>, MgStatus> {
    if m == 0 {
        return Err(fail(MgStatus::InvalidArgument, "points need at least one coordinate"));
    }
    let len = count
        .checked_mul(m)
        .ok_or_else(|| fail(MgStatus::InvalidArgument, "point count overflows"))?;
    Ok(input(data, len)?.chunks(m).map(<[f64]>::to_vec).collect())
}

/// Nondominated subset of `count` points of dimension `m` (row-major). The
/// kept points are written to the front of `out` (capacity `count * m`)
/// and their number to `*kept`.
///
/// # Safety
/// `data` and `out` must hold `count * m` doubles; `kept` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_pareto_filter(
    data: *const f64,
    count: usize,
    m: usize,
    out: *mut f64,
    kept: *mut usize,
) -> MgStatus {
    guard(|| {
        if kept.is_null() {
            return fail(MgStatus::NullPointer, "null output");
        }
        let pts = tri!(points(data, count, m));
        let front = bench::pareto_filter(&pts);
        let dst = tri!(output(out, count * m));
        for (chunk, p) in dst.chunks_mut(m).zip(&front) {
            chunk.copy_from_slice(p);
        }
        *kept = front.len();
        MgStatus::Ok
    })
}

/// Spacing of a front of `count` points. Writes NaN when it is undefined
/// (fewer than two points).
///
/// # Safety
/// `data` must hold `count * m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_spacing(data: *const f64, count: usize, m: usize, out: *mut f64) -> MgStatus {
    guard(|| {
        if out.is_null() {
            return fail(MgStatus::NullPointer, "null output");
        }
        let pts = tri!(points(data, count, m));
        *out = bench::spacing(&pts).unwrap_or(f64::NAN);
        MgStatus::Ok
    })
}

/// Fraction of the `pooled` points matched by some point of `front`, with
/// matches tested in the ∞-norm at `match_tol`.
///
/// # Safety
/// `front` must hold `front_count * m` doubles, `pooled` `pooled_count * m`
/// doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_purity(
    front: *const f64,
    front_count: usize,
    pooled: *const f64,
    pooled_count: usize,
    m: usize,
    match_tol: f64,
    out: *mut f64,
) -> MgStatus {
    guard(|| {
        if out.is_null() {
            return fail(MgStatus::NullPointer, "null output");
        }
        let f = tri!(points(front, front_count, m));
        let p = tri!(points(pooled, pooled_count, m));
        *out = bench::purity(&f, &p, match_tol);
        MgStatus::Ok
    })
}
