//! C ABI for the `fourhom` homogenization solver.
//!
//! Conventions of the surface:
//!
//! * every fallible entry point returns an [`FhStatus`]; `FH_STATUS_OK` is 0;
//! * a solve produces an opaque [`FhSolution`] handle, inspected through the
//!   `fh_solution_*` getters and released with [`fh_solution_free`];
//! * on failure a thread-local message is recorded; [`fh_last_error`] returns
//!   it and the pointer stays valid until the next library call on the same
//!   thread;
//! * field buffers are caller-allocated and passed with their length in
//!   elements, which is checked before anything is written;
//! * panics are caught at the boundary and reported as `FH_STATUS_PANIC`;
//!   they never unwind into the caller.
//!
//! Strain and stress fields are laid out cell-major (axis 0 fastest, as in
//! the solver), with the symmetric-tensor components of one cell stored
//! contiguously: `11, 22, 12` in 2-D and `11, 22, 33, 12, 13, 23` in 3-D.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::str::FromStr;

use fourhom::config::RunConfig;
use fourhom::error::Error;
use fourhom::postproc::{macro_error, micro_error};
use fourhom::sampling::{adapted_mask, full_mask, mask_to_text, radial_mask, Pattern};
use fourhom::spectral::{basic_scheme_solve, SolveResult};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FhStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input: configuration JSON, pattern name, parameter ranges.
    InvalidArgument = 2,
    /// The solver failed hard (non-finite iterates or inconsistent state).
    /// Plain non-convergence is not an error; check `fh_solution_converged`.
    Solver = 3,
    /// A filesystem operation inside the library failed.
    Io = 4,
    /// A caller-supplied buffer is shorter than the data it must receive.
    BufferTooSmall = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Opaque handle to a finished solve.
///
/// Created by [`fh_solve`], released by [`fh_solution_free`]. A handle is
/// immutable; it is safe to read from multiple threads, but creation and
/// destruction must not race with reads.
pub struct FhSolution {
    result: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| {
        CString::new("error message contained an interior NUL byte").unwrap()
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_for(err: &Error) -> FhStatus {
    match err {
        Error::Invalid(_) | Error::Format { .. } => FhStatus::InvalidArgument,
        Error::Solver(_) | Error::ImaginaryResidue { .. } => FhStatus::Solver,
        Error::Io { .. } => FhStatus::Io,
    }
}

fn fail(err: &Error) -> FhStatus {
    set_last_error(err.to_string());
    status_for(err)
}

/// Run `f` with panics converted to `FH_STATUS_PANIC`.
fn guard<F: FnOnce() -> FhStatus>(f: F) -> FhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic caught at the C boundary".to_string());
            FhStatus::Panic
        }
    }
}

/// Borrow a C string argument, recording an error when it is null or not
/// UTF-8.
///
/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for the call.
unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, FhStatus> {
    if ptr.is_null() {
        set_last_error(format!("{name} must not be null"));
        return Err(FhStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error(format!("{name} is not valid UTF-8"));
        FhStatus::InvalidArgument
    })
}

unsafe fn solution_arg<'a>(
    ptr: *const FhSolution,
    name: &str,
) -> Result<&'a FhSolution, FhStatus> {
    if ptr.is_null() {
        set_last_error(format!("{name} must not be null"));
        return Err(FhStatus::NullPointer);
    }
    Ok(&*ptr)
}

fn solve_impl(config_json: &str, pattern: &str, r_percent: f64) -> fourhom::Result<SolveResult> {
    let config = RunConfig::from_json(config_json)?;
    let (phases, materials, eps_bar, settings) = config.build()?;
    let pattern = Pattern::from_str(pattern)?;
    let mask = match pattern {
        Pattern::Full => full_mask(*phases.grid()),
        Pattern::Radial => radial_mask(
            *phases.grid(),
            r_percent,
            &config.radial.unwrap_or_default(),
        )?,
        Pattern::Adapted => adapted_mask(&phases, r_percent)?,
    };
    basic_scheme_solve(&phases, &materials, &eps_bar, &mask, &settings)
}

/// Library version as a static NUL-terminated string; never fails, never
/// needs freeing.
#[no_mangle]
pub extern "C" fn fh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on the calling thread, or null when no
/// failure has been recorded. The pointer is owned by the library and stays
/// valid until the next `fh_*` call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn fh_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Solve the periodic homogenization problem described by a configuration
/// document on the given frequency pattern.
///
/// `config_json` is the same JSON schema the CLI accepts (geometry, grid,
/// material, macro_strain, tolerances, ...); its `patterns` / `r_values`
/// entries are ignored here in favor of the explicit arguments. `pattern` is
/// `"full"`, `"radial"` or `"adapted"`; `r_percent` is the percentage of
/// retained frequencies and is ignored for `"full"`.
///
/// On success writes a new handle to `*out` and returns `FH_STATUS_OK`. The
/// handle must be released with [`fh_solution_free`]. Exhausting the
/// iteration budget still succeeds; inspect [`fh_solution_converged`].
///
/// # Safety
/// `config_json` and `pattern` must be NUL-terminated strings and `out` must
/// point to writable storage for one pointer, all valid for the call.
#[no_mangle]
pub unsafe extern "C" fn fh_solve(
    config_json: *const c_char,
    pattern: *const c_char,
    r_percent: f64,
    out: *mut *mut FhSolution,
) -> FhStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("out must not be null".to_string());
            return FhStatus::NullPointer;
        }
        let config_json = match str_arg(config_json, "config_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let pattern = match str_arg(pattern, "pattern") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match solve_impl(config_json, pattern, r_percent) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(FhSolution { result }));
                FhStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Release a handle obtained from [`fh_solve`]. Null is a no-op.
///
/// # Safety
/// `sol` must be null or a pointer returned by [`fh_solve`] that has not been
/// freed yet; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fh_solution_free(sol: *mut FhSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Spatial dimension of the solve (2 or 3), or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_dim(sol: *const FhSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.strain.grid().dim())
}

/// Write the per-axis cell counts into `out` (one entry per dimension).
/// `len` is the capacity of `out` in elements.
///
/// # Safety
/// `sol` must be null or a live handle; `out` must point to `len` writable
/// `size_t` slots.
#[no_mangle]
pub unsafe extern "C" fn fh_solution_dims(
    sol: *const FhSolution,
    out: *mut usize,
    len: usize,
) -> FhStatus {
    guard(|| {
        let sol = match solution_arg(sol, "sol") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_last_error("out must not be null".to_string());
            return FhStatus::NullPointer;
        }
        let dims = sol.result.strain.grid().dims();
        if len < dims.len() {
            set_last_error(format!(
                "dims buffer holds {len} entries, {} required",
                dims.len()
            ));
            return FhStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(dims.as_ptr(), out, dims.len());
        FhStatus::Ok
    })
}

/// Total number of grid cells, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_cells(sol: *const FhSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.strain.grid().len())
}

/// Number of symmetric-tensor components per cell (3 in 2-D, 6 in 3-D), or 0
/// for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_components(sol: *const FhSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.strain.grid().ncomp())
}

/// Total fixed-point iterations across all load steps, or 0 for a null
/// handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_iterations(sol: *const FhSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.total_iterations())
}

/// Whether every load step met the tolerance within the iteration budget.
/// False for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_converged(sol: *const FhSolution) -> bool {
    sol.as_ref().is_some_and(|s| s.result.converged)
}

/// Residual at the end of the last executed load step; NaN for a null
/// handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_residual(sol: *const FhSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.result.final_residual())
}

/// Number of retained frequencies of the mask the solve ran on, or 0 for a
/// null handle.
///
/// # Safety
/// `sol` must be null or a live handle from [`fh_solve`].
#[no_mangle]
pub unsafe extern "C" fn fh_solution_mask_len(sol: *const FhSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.result.mask_len)
}

unsafe fn copy_field(
    sol: *const FhSolution,
    out: *mut f64,
    len: usize,
    pick: fn(&SolveResult) -> &[f64],
) -> FhStatus {
    let sol = match solution_arg(sol, "sol") {
        Ok(s) => s,
        Err(status) => return status,
    };
    if out.is_null() {
        set_last_error("out must not be null".to_string());
        return FhStatus::NullPointer;
    }
    let data = pick(&sol.result);
    if len < data.len() {
        set_last_error(format!(
            "field buffer holds {len} elements, {} required",
            data.len()
        ));
        return FhStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    FhStatus::Ok
}

/// Copy the strain field into `out` (`cells * components` elements, layout
/// as described in the crate docs). `len` is the capacity of `out`.
///
/// # Safety
/// `sol` must be null or a live handle; `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fh_solution_strain(
    sol: *const FhSolution,
    out: *mut f64,
    len: usize,
) -> FhStatus {
    guard(|| copy_field(sol, out, len, |r| r.strain.data()))
}

/// Copy the stress field into `out` (`cells * components` elements). `len`
/// is the capacity of `out`.
///
/// # Safety
/// `sol` must be null or a live handle; `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fh_solution_stress(
    sol: *const FhSolution,
    out: *mut f64,
    len: usize,
) -> FhStatus {
    guard(|| copy_field(sol, out, len, |r| r.stress.data()))
}

/// Copy the volume-averaged stress into `out` (`components` elements). `len`
/// is the capacity of `out`.
///
/// # Safety
/// `sol` must be null or a live handle; `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fh_solution_macro_stress(
    sol: *const FhSolution,
    out: *mut f64,
    len: usize,
) -> FhStatus {
    guard(|| {
        let sol = match solution_arg(sol, "sol") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_last_error("out must not be null".to_string());
            return FhStatus::NullPointer;
        }
        let comps = sol.result.macro_stress.components();
        if len < comps.len() {
            set_last_error(format!(
                "macro stress buffer holds {len} elements, {} required",
                comps.len()
            ));
            return FhStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(comps.as_ptr(), out, comps.len());
        FhStatus::Ok
    })
}

/// Relative stress errors of `sol` against `reference` on the same grid:
/// macroscopic (volume-averaged stress) into `*out_macro` and microscopic
/// (mean pointwise) into `*out_micro`. Either output pointer may be null to
/// skip that metric.
///
/// # Safety
/// `sol` and `reference` must be live handles; `out_macro` / `out_micro`
/// must each be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn fh_compare(
    sol: *const FhSolution,
    reference: *const FhSolution,
    out_macro: *mut f64,
    out_micro: *mut f64,
) -> FhStatus {
    guard(|| {
        let sol = match solution_arg(sol, "sol") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let reference = match solution_arg(reference, "reference") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if !out_macro.is_null() {
            match macro_error(&sol.result, &reference.result) {
                Ok(v) => *out_macro = v,
                Err(err) => return fail(&err),
            }
        }
        if !out_micro.is_null() {
            match micro_error(&sol.result, &reference.result) {
                Ok(v) => *out_micro = v.value,
                Err(err) => return fail(&err),
            }
        }
        FhStatus::Ok
    })
}

/// Build the frequency mask a solve would use and return its text form (a
/// commented header plus one centered index per line) as a newly allocated
/// string in `*out`. Free it with [`fh_string_free`].
///
/// # Safety
/// `config_json` and `pattern` must be NUL-terminated strings and `out` must
/// point to writable storage for one pointer, all valid for the call.
#[no_mangle]
pub unsafe extern "C" fn fh_mask_text(
    config_json: *const c_char,
    pattern: *const c_char,
    r_percent: f64,
    out: *mut *mut c_char,
) -> FhStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("out must not be null".to_string());
            return FhStatus::NullPointer;
        }
        let config_json = match str_arg(config_json, "config_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let pattern = match str_arg(pattern, "pattern") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let text = (|| -> fourhom::Result<String> {
            let config = RunConfig::from_json(config_json)?;
            let (phases, _, _, _) = config.build()?;
            let pattern = Pattern::from_str(pattern)?;
            let mask = match pattern {
                Pattern::Full => full_mask(*phases.grid()),
                Pattern::Radial => radial_mask(
                    *phases.grid(),
                    r_percent,
                    &config.radial.unwrap_or_default(),
                )?,
                Pattern::Adapted => adapted_mask(&phases, r_percent)?,
            };
            Ok(mask_to_text(&mask))
        })();
        match text {
            Ok(text) => match CString::new(text) {
                Ok(c) => {
                    *out = c.into_raw();
                    FhStatus::Ok
                }
                Err(_) => {
                    set_last_error("mask text contained an interior NUL byte".to_string());
                    FhStatus::Panic
                }
            },
            Err(err) => fail(&err),
        }
    })
}

/// Free a string returned by [`fh_mask_text`]. Null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer returned by [`fh_mask_text`] that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn fh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
