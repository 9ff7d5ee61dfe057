//! C ABI over the dynamic solvers.
//!
//! A solver is an opaque handle created by [`dynlabel_solver_new`] and
//! released by [`dynlabel_solver_free`]. Every fallible call returns a
//! [`DynlabelStatus`]; the message of the last failure on a handle is
//! available from [`dynlabel_solver_last_error`]. Coordinates are given in
//! label units (a unit square has side 1) and rounded to the solver's scale.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dynlabel::algo::grid::GridFrame;
use dynlabel::augment::AugmentPolicy;
use dynlabel::bench::format::Mode;
use dynlabel::bench::{build_solver, Algo, DynamicSolver, SolverConfig};
use dynlabel::geometry::check_coord;
use dynlabel::{Coord, Error, LabelId, Rect, Scale};

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynlabelStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownAlgo = 3,
    InvalidScale = 4,
    InvalidShift = 5,
    DuplicateId = 6,
    UnknownId = 7,
    OutOfFrame = 8,
    NotASquare = 9,
    InvalidWidth = 10,
    CoordOutOfRange = 11,
    UnsupportedMode = 12,
    BufferTooSmall = 13,
    InvariantViolation = 14,
    Internal = 15,
}

/// How augmented solvers repair their extra labels.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynlabelAugment {
    Local = 0,
    Full = 1,
}

/// A label in label units; `width` is 1 for unit squares.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynlabelLabel {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
}

/// Solver parameters.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct DynlabelConfig {
    /// NUL-terminated algorithm name: mis-ors, mis-graph, grid, grid-k,
    /// line, g-grid, g-grid-k or g-line.
    pub algo: *const c_char,
    /// Shifting parameter of grid-k and g-grid-k.
    pub k: usize,
    /// Decimal exponent of the coordinate scale, 0 to 9.
    pub scale_exponent: u32,
    pub augment: DynlabelAugment,
    /// Grid window for grid and g-grid, in grid points: rows and columns in
    /// `origin .. origin + extent`. An extent of 0 fits the window to the
    /// initial labels with a margin of one point.
    pub grid_row0: i64,
    pub grid_col0: i64,
    pub grid_extent: i64,
}

/// Opaque solver handle.
pub struct DynlabelSolver {
    inner: Box<dyn DynamicSolver>,
    scale: Scale,
    last_error: CString,
}

fn status_of(e: &Error) -> DynlabelStatus {
    match e {
        Error::DuplicateId(_) => DynlabelStatus::DuplicateId,
        Error::UnknownId(_) => DynlabelStatus::UnknownId,
        Error::OutOfFrame { .. } => DynlabelStatus::OutOfFrame,
        Error::NotASquare { .. } => DynlabelStatus::NotASquare,
        Error::InvalidWidth { .. } => DynlabelStatus::InvalidWidth,
        Error::CoordOutOfRange(_) => DynlabelStatus::CoordOutOfRange,
        Error::InvalidScale(_) => DynlabelStatus::InvalidScale,
        Error::InvalidShift => DynlabelStatus::InvalidShift,
        Error::UnknownAlgo(_) => DynlabelStatus::UnknownAlgo,
        Error::UnsupportedMode { .. } => DynlabelStatus::UnsupportedMode,
        _ => DynlabelStatus::Internal,
    }
}

fn coord(scale: &Scale, v: f64) -> Result<Coord, Error> {
    if !v.is_finite() {
        return Err(Error::CoordOutOfRange(Coord::MAX));
    }
    check_coord(scale.scale_f64(v))
}

fn to_rect(scale: &Scale, l: &DynlabelLabel) -> Result<Rect, Error> {
    Ok(Rect::new(
        l.id,
        coord(scale, l.x)?,
        coord(scale, l.y)?,
        coord(scale, l.width)?,
    ))
}

fn guard(f: impl FnOnce() -> DynlabelStatus) -> DynlabelStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(DynlabelStatus::Internal)
}

impl DynlabelSolver {
    fn fail(&mut self, status: DynlabelStatus, msg: impl ToString) -> DynlabelStatus {
        let msg = msg.to_string().replace('\0', " ");
        self.last_error = CString::new(msg).unwrap_or_default();
        status
    }

    fn report(&mut self, r: Result<(), Error>) -> DynlabelStatus {
        match r {
            Ok(()) => DynlabelStatus::Ok,
            Err(e) => self.fail(status_of(&e), e),
        }
    }
}

fn build(cfg: &DynlabelConfig, labels: &[DynlabelLabel]) -> Result<DynlabelSolver, (DynlabelStatus, String)> {
    let err = |e: Error| (status_of(&e), e.to_string());
    if cfg.algo.is_null() {
        return Err((DynlabelStatus::NullPointer, "algo is null".into()));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    let name = unsafe { CStr::from_ptr(cfg.algo) }
        .to_str()
        .map_err(|_| (DynlabelStatus::InvalidArgument, "algo is not UTF-8".to_string()))?;
    let scale = Scale::new(cfg.scale_exponent).map_err(err)?;
    let algo = Algo::parse(name, cfg.k).map_err(err)?;
    let mut sc = SolverConfig::new(algo, scale);
    sc.mode = if algo.supports(Mode::Rects) {
        Mode::Rects
    } else {
        Mode::Squares
    };
    sc.augment = match cfg.augment {
        DynlabelAugment::Local => AugmentPolicy::Local,
        DynlabelAugment::Full => AugmentPolicy::Full,
    };
    if cfg.grid_extent > 0 {
        sc.frame = Some(GridFrame {
            row0: cfg.grid_row0,
            col0: cfg.grid_col0,
            kappa: cfg.grid_extent,
        });
    }
    let rects = labels
        .iter()
        .map(|l| to_rect(&scale, l))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let inner = build_solver(&sc, &rects).map_err(err)?;
    Ok(DynlabelSolver {
        inner,
        scale,
        last_error: CString::default(),
    })
}

/// Default parameters for `algo`: k = 2, scale exponent 3, local repair and
/// a window fitted to the initial labels.
#[no_mangle]
pub extern "C" fn dynlabel_config_default(algo: *const c_char) -> DynlabelConfig {
    DynlabelConfig {
        algo,
        k: 2,
        scale_exponent: 3,
        augment: DynlabelAugment::Local,
        grid_row0: 0,
        grid_col0: 0,
        grid_extent: 0,
    }
}

/// Builds a solver over `len` initial labels and stores it in `*out`. On
/// failure `*out` is null and, when `err_buf` is non-null, a NUL-terminated
/// message truncated to `err_len` bytes is written there.
///
/// # Safety
/// `config` and `out` must be valid pointers, `labels` must point to `len`
/// labels (or be null with `len == 0`), and `err_buf` must be null or point
/// to `err_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_new(
    config: *const DynlabelConfig,
    labels: *const DynlabelLabel,
    len: usize,
    out: *mut *mut DynlabelSolver,
    err_buf: *mut c_char,
    err_len: usize,
) -> DynlabelStatus {
    guard(|| {
        if config.is_null() || out.is_null() || (labels.is_null() && len > 0) {
            return DynlabelStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let labels = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(labels, len)
        };
        match build(&*config, labels) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(s));
                DynlabelStatus::Ok
            }
            Err((status, msg)) => {
                if !err_buf.is_null() && err_len > 0 {
                    let n = msg.len().min(err_len - 1);
                    ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), err_buf, n);
                    *err_buf.add(n) = 0;
                }
                status
            }
        }
    })
}

/// Releases a solver; null is ignored.
///
/// # Safety
/// `solver` must be null or a handle from [`dynlabel_solver_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_free(solver: *mut DynlabelSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Inserts a label.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_insert(
    solver: *mut DynlabelSolver,
    label: DynlabelLabel,
) -> DynlabelStatus {
    let Some(s) = solver.as_mut() else {
        return DynlabelStatus::NullPointer;
    };
    guard(|| {
        let r = to_rect(&s.scale, &label).and_then(|r| s.inner.insert(r));
        s.report(r)
    })
}

/// Deletes the label with `id`.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_delete(solver: *mut DynlabelSolver, id: u64) -> DynlabelStatus {
    let Some(s) = solver.as_mut() else {
        return DynlabelStatus::NullPointer;
    };
    guard(|| {
        let r = s.inner.delete(LabelId(id));
        s.report(r)
    })
}

/// Size of the maintained solution; 0 for a null handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_size(solver: *const DynlabelSolver) -> usize {
    solver.as_ref().map_or(0, |s| s.inner.size())
}

/// Writes the ids of the solution, ascending, into `buf` and their count
/// into `*len_out`. If `cap` is too small nothing is written to `buf`, the
/// required count is stored and `BufferTooSmall` is returned.
///
/// # Safety
/// `solver` and `len_out` must be valid, and `buf` must point to `cap`
/// writable ids (or be null with `cap == 0`).
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_solution(
    solver: *mut DynlabelSolver,
    buf: *mut u64,
    cap: usize,
    len_out: *mut usize,
) -> DynlabelStatus {
    let Some(s) = solver.as_mut() else {
        return DynlabelStatus::NullPointer;
    };
    if len_out.is_null() || (buf.is_null() && cap > 0) {
        return DynlabelStatus::NullPointer;
    }
    guard(|| {
        let mut ids: Vec<u64> = s.inner.solution().into_iter().map(|id| id.0).collect();
        ids.sort_unstable();
        *len_out = ids.len();
        if ids.len() > cap {
            return s.fail(
                DynlabelStatus::BufferTooSmall,
                format!("solution has {} ids, buffer holds {cap}", ids.len()),
            );
        }
        if !ids.is_empty() {
            ptr::copy_nonoverlapping(ids.as_ptr(), buf, ids.len());
        }
        DynlabelStatus::Ok
    })
}

/// Checks the solver's internal invariants.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_check(solver: *mut DynlabelSolver) -> DynlabelStatus {
    let Some(s) = solver.as_mut() else {
        return DynlabelStatus::NullPointer;
    };
    guard(|| match s.inner.check() {
        Ok(()) => DynlabelStatus::Ok,
        Err(m) => s.fail(DynlabelStatus::InvariantViolation, m),
    })
}

/// Message of the last failed call on `solver`, empty if none. The pointer
/// stays valid until the next call on the handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dynlabel_solver_last_error(solver: *const DynlabelSolver) -> *const c_char {
    match solver.as_ref() {
        Some(s) => s.last_error.as_ptr(),
        None => c"".as_ptr(),
    }
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn dynlabel_status_name(status: DynlabelStatus) -> *const c_char {
    let s: &'static CStr = match status {
        DynlabelStatus::Ok => c"ok",
        DynlabelStatus::NullPointer => c"null pointer",
        DynlabelStatus::InvalidArgument => c"invalid argument",
        DynlabelStatus::UnknownAlgo => c"unknown algorithm",
        DynlabelStatus::InvalidScale => c"invalid scale",
        DynlabelStatus::InvalidShift => c"invalid shifting parameter",
        DynlabelStatus::DuplicateId => c"duplicate id",
        DynlabelStatus::UnknownId => c"unknown id",
        DynlabelStatus::OutOfFrame => c"out of frame",
        DynlabelStatus::NotASquare => c"not a square",
        DynlabelStatus::InvalidWidth => c"invalid width",
        DynlabelStatus::CoordOutOfRange => c"coordinate out of range",
        DynlabelStatus::UnsupportedMode => c"unsupported mode",
        DynlabelStatus::BufferTooSmall => c"buffer too small",
        DynlabelStatus::InvariantViolation => c"invariant violation",
        DynlabelStatus::Internal => c"internal error",
    };
    s.as_ptr()
}
