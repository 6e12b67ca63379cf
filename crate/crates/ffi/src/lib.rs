//! C ABI over the `msrg` solver: opaque handles, status codes and a
//! thread-local last-error message.
//!
//! Every fallible function returns an [`MsrgStatus`]; on failure the message
//! is available from [`msrg_last_error_message`] on the same thread. Handles
//! are created by `*_new` or solver functions and released by the matching
//! `*_free`, which accepts null.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use msrg::lattice::{DyadicTime, ModelSpec, ProblemSpec, State, MODEL_A, MODEL_B};
use msrg::rg::rg_apply;
use msrg::solver::{flow_psi, solve_regularized, solve_strong, BlowupOutcome, FlowMap, RegSpec, Solution};
use msrg::stochastic::p_coefficient;
use msrg::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsrgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SpaceMismatch = 3,
    NotOnLattice = 4,
    Unsupported = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

/// Built-in symbolic models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsrgModel {
    A = 0,
    B = 1,
}

/// Treatment of scales beyond the regularization level.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsrgReg {
    /// Scales beyond `N` are zero.
    Cutoff = 0,
    /// Scale `N + 1` is pinned to one.
    Unit = 1,
}

/// Initial and boundary data for a symbolic model.
pub struct MsrgProblem(ProblemSpec);

/// A regularized solution on the dyadic lattice.
pub struct MsrgSolution(Solution);

/// A memoized flow map on bit states.
pub struct MsrgFlowMap {
    map: FlowMap,
    model: ModelSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MsrgStatus {
    match e {
        Error::InvalidArgument(_) | Error::Empty(_) | Error::RegTableIncomplete { .. } => MsrgStatus::InvalidArgument,
        Error::SpaceMismatch { .. } => MsrgStatus::SpaceMismatch,
        Error::NotOnLattice { .. } => MsrgStatus::NotOnLattice,
        Error::Unsupported(_) => MsrgStatus::Unsupported,
        Error::OutOfRange(_) | Error::ScaleBeyondLevel { .. } => MsrgStatus::OutOfRange,
    }
}

struct Fail(MsrgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `body`, recording any error or panic as the last error.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MsrgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MsrgStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            MsrgStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(MsrgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn model_spec(m: MsrgModel) -> ModelSpec {
    match m {
        MsrgModel::A => MODEL_A,
        MsrgModel::B => MODEL_B,
    }
}

fn reg_spec(r: MsrgReg) -> RegSpec {
    match r {
        MsrgReg::Cutoff => RegSpec::Cutoff,
        MsrgReg::Unit => RegSpec::unit(),
    }
}

fn check_bits(bits: &[u8], what: &str) -> Result<(), Fail> {
    match bits.iter().position(|&b| b > 1) {
        Some(i) => Err(Fail(MsrgStatus::InvalidArgument, format!("{what}[{i}] = {} is not a bit", bits[i]))),
        None => Ok(()),
    }
}

/// Length in bytes, including the terminating nul, of the last error message
/// on this thread; 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn msrg_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes_with_nul().len()))
}

/// Copies the last error message into `buf` (nul terminated, truncated to
/// `cap`) and returns the full length including the nul.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn msrg_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(c) = e.as_ref() else {
            if !buf.is_null() && cap > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = c.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn msrg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a problem from 0/1 initial values `a_1..a_k` (zero beyond) and
/// boundary values `b_0..b_m` (zero beyond).
///
/// # Safety
/// The arrays must hold the given number of bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_problem_new(
    model: MsrgModel,
    initial: *const u8,
    initial_len: usize,
    boundary: *const u8,
    boundary_len: usize,
    out_problem: *mut *mut MsrgProblem,
) -> MsrgStatus {
    guard(|| {
        let dst = out(out_problem, "out_problem")?;
        let a = slice(initial, initial_len, "initial")?;
        let b = slice(boundary, boundary_len, "boundary")?;
        check_bits(a, "initial")?;
        check_bits(b, "boundary")?;
        let p = ProblemSpec::bits(model_spec(model), a, b)?;
        *dst = Box::into_raw(Box::new(MsrgProblem(p)));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from [`msrg_problem_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn msrg_problem_free(problem: *mut MsrgProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Blowup time of the strong solution up to the horizon
/// `horizon_num / 2^horizon_level`. `found` is 1 and the time is written as
/// `time_num / 2^time_level` when a blowup is detected, 0 otherwise.
///
/// # Safety
/// `problem` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_blowup_time(
    problem: *const MsrgProblem,
    horizon_num: u64,
    horizon_level: u32,
    found: *mut u8,
    time_num: *mut u64,
    time_level: *mut u32,
) -> MsrgStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let (found, num, lvl) = (out(found, "found")?, out(time_num, "time_num")?, out(time_level, "time_level")?);
        let report = solve_strong(&p.0, &DyadicTime::new(horizon_num, horizon_level))?;
        *found = 0;
        if let BlowupOutcome::BlowupAt { time } = report.outcome {
            let n = u64::try_from(time.numerator())
                .map_err(|_| Fail(MsrgStatus::OutOfRange, "blowup time does not fit in 64 bits".into()))?;
            *found = 1;
            *num = n;
            *lvl = time.level();
        }
        Ok(())
    })
}

/// Solves the problem regularized at `level` up to `horizon_num / 2^horizon_level`.
///
/// # Safety
/// `problem` must be a live handle; `out_solution` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_solve(
    problem: *const MsrgProblem,
    level: u32,
    reg: MsrgReg,
    horizon_num: u64,
    horizon_level: u32,
    out_solution: *mut *mut MsrgSolution,
) -> MsrgStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let dst = out(out_solution, "out_solution")?;
        let sol = solve_regularized(&p.0, level, &reg_spec(reg), &DyadicTime::new(horizon_num, horizon_level))?;
        *dst = Box::into_raw(Box::new(MsrgSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a handle from [`msrg_solve`], freed once.
#[no_mangle]
pub unsafe extern "C" fn msrg_solution_free(solution: *mut MsrgSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of stored times `m tau_scale`, `m = 0..len`, at `scale`.
///
/// # Safety
/// `solution` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_solution_row_len(solution: *const MsrgSolution, scale: u32, len: *mut usize) -> MsrgStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let len = out(len, "len")?;
        if scale > s.0.level() + 1 {
            return Err(Fail(MsrgStatus::OutOfRange, format!("scale {scale} beyond level {}", s.0.level())));
        }
        *len = s.0.row_len(scale);
        Ok(())
    })
}

/// The bit `u_scale(index * tau_scale)`.
///
/// # Safety
/// `solution` must be a live handle; `bit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_solution_value(
    solution: *const MsrgSolution,
    scale: u32,
    index: u64,
    bit: *mut u8,
) -> MsrgStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let bit = out(bit, "bit")?;
        let v = s
            .0
            .value(scale, index)
            .ok_or_else(|| Fail(MsrgStatus::OutOfRange, format!("no value at scale {scale}, index {index}")))?;
        *bit = v.as_bit()?;
        Ok(())
    })
}

/// Writes 1 to `ok` when the solution satisfies the governing relation at
/// every resolved lattice point, 0 otherwise.
///
/// # Safety
/// `solution` must be a live handle; `ok` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_solution_residual_ok(solution: *const MsrgSolution, ok: *mut u8) -> MsrgStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let ok = out(ok, "ok")?;
        *ok = u8::from(s.0.residual()?.passes());
        Ok(())
    })
}

/// The flow map `psi^(N)` of the model over one unit of time.
///
/// # Safety
/// `out_map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_flow_psi_new(
    model: MsrgModel,
    level: u32,
    reg: MsrgReg,
    out_map: *mut *mut MsrgFlowMap,
) -> MsrgStatus {
    guard(|| {
        let dst = out(out_map, "out_map")?;
        let model = model_spec(model);
        let map = flow_psi(model, level, reg_spec(reg))?;
        *dst = Box::into_raw(Box::new(MsrgFlowMap { map, model }));
        Ok(())
    })
}

/// One renormalization step of `map` in its own model, as a new handle.
///
/// # Safety
/// `map` must be a live handle; `out_map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_flow_rg_apply(map: *const MsrgFlowMap, out_map: *mut *mut MsrgFlowMap) -> MsrgStatus {
    guard(|| {
        let m = handle(map, "map")?;
        let dst = out(out_map, "out_map")?;
        let next = rg_apply(&m.map, m.model);
        *dst = Box::into_raw(Box::new(MsrgFlowMap { map: next, model: m.model }));
        Ok(())
    })
}

/// Applies `map` to the zero-tailed state `input` and writes the first
/// `output_len` output components.
///
/// # Safety
/// `map` must be a live handle; the arrays must hold the given lengths.
#[no_mangle]
pub unsafe extern "C" fn msrg_flow_apply(
    map: *const MsrgFlowMap,
    input: *const u8,
    input_len: usize,
    output: *mut u8,
    output_len: usize,
) -> MsrgStatus {
    guard(|| {
        let m = handle(map, "map")?;
        let a = slice(input, input_len, "input")?;
        check_bits(a, "input")?;
        if output_len > 0 && output.is_null() {
            return Err(null("output"));
        }
        let image = m.map.apply(&State::bits(a))?;
        for (i, v) in image.take(output_len).into_iter().enumerate() {
            *output.add(i) = v.as_bit()?;
        }
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a flow-map handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn msrg_flow_free(map: *mut MsrgFlowMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Decimal digits of the circle-model coefficient `p_n^(N)` of `x_0`,
/// nul terminated. `needed` receives the full length including the nul;
/// a short buffer yields [`MsrgStatus::BufferTooSmall`] and no write.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes; `needed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msrg_phase_p_coefficient(
    n: u32,
    level: u32,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> MsrgStatus {
    guard(|| {
        let needed = out(needed, "needed")?;
        let digits = p_coefficient(n, level)?.to_string();
        *needed = digits.len() + 1;
        if buf.is_null() || cap < *needed {
            return Err(Fail(
                MsrgStatus::BufferTooSmall,
                format!("p_{n}^({level}) needs {} bytes, buffer has {cap}", *needed),
            ));
        }
        ptr::copy_nonoverlapping(digits.as_ptr() as *const c_char, buf, digits.len());
        *buf.add(digits.len()) = 0;
        Ok(())
    })
}
