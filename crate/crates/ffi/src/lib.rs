//! C interface to the meaningfulness metric.
//!
//! Fallible calls return an [`AmmStatus`]. On failure a message is kept
//! for the calling thread and can be read with [`amm_last_error`].
//! Matrices and reports are opaque handles released with their `_free`
//! function; strings returned by the library are released with
//! [`amm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use amm_core::io::{read_matrix, report_to_json, write_matrix};
use amm_core::{distance, evaluate_meaningfulness, AttributeMatrix, DistanceKind, Error, MeaningfulnessReport, MetricConfig, SolverOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    NonBinaryEntry = 3,
    EmptyMatrix = 4,
    RaggedRows = 5,
    NonFiniteScore = 6,
    TooFewAttributes = 7,
    DegenerateSplit = 8,
    LengthMismatch = 9,
    OutOfRange = 10,
    InvalidParameter = 11,
    ParseError = 12,
    HeaderMismatch = 13,
    IoFailure = 14,
    Panic = 15,
}

/// Values accepted by the `kind` argument of [`amm_distance`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmmDistanceKind {
    Lsq = 0,
    Cvx = 1,
    Jp = 2,
}

/// A ±1 attribute matrix.
pub struct AmmMatrix(AttributeMatrix);

/// The result of [`amm_evaluate`].
pub struct AmmReport(MeaningfulnessReport);

/// Metric settings. Obtain defaults from [`amm_metric_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AmmMetricOptions {
    pub split_ratio: f64,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub full_distance: bool,
    /// Noise counts, or null for the default grid.
    pub grid: *const usize,
    pub grid_len: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AmmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NonBinaryEntry { .. } => AmmStatus::NonBinaryEntry,
            Error::EmptyMatrix => AmmStatus::EmptyMatrix,
            Error::RaggedRows { .. } => AmmStatus::RaggedRows,
            Error::NonFiniteScore { .. } => AmmStatus::NonFiniteScore,
            Error::TooFewAttributes(_) => AmmStatus::TooFewAttributes,
            Error::DegenerateSplit { .. } => AmmStatus::DegenerateSplit,
            Error::LengthMismatch { .. } => AmmStatus::LengthMismatch,
            Error::OutOfRange(_) => AmmStatus::OutOfRange,
            Error::InvalidParameter(_) => AmmStatus::InvalidParameter,
            Error::ParseError { .. } | Error::Json(_) => AmmStatus::ParseError,
            Error::HeaderMismatch { .. } => AmmStatus::HeaderMismatch,
            Error::IoFailure { .. } => AmmStatus::IoFailure,
        };
        Failure(status, e.to_string())
    }
}

fn null_arg(name: &str) -> Failure {
    Failure(AmmStatus::NullPointer, format!("`{name}` is null"))
}

fn set_last_error(msg: Option<String>) {
    let msg = msg.map(|m| CString::new(m.replace('\0', " ")).unwrap_or_default());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AmmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            AmmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("internal panic: {msg}")));
            AmmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null_arg(name))
}

unsafe fn path_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AmmStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null_arg(name));
    }
    out.write(value);
    Ok(())
}

/// Message describing the last failed call on this thread, or null if the
/// last status-returning call succeeded. Valid until the next such call on
/// this thread.
#[no_mangle]
pub extern "C" fn amm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code, e.g. `"LengthMismatch"`.
#[no_mangle]
pub extern "C" fn amm_status_name(status: AmmStatus) -> *const c_char {
    let name: &'static CStr = match status {
        AmmStatus::Ok => c"Ok",
        AmmStatus::NullPointer => c"NullPointer",
        AmmStatus::InvalidUtf8 => c"InvalidUtf8",
        AmmStatus::NonBinaryEntry => c"NonBinaryEntry",
        AmmStatus::EmptyMatrix => c"EmptyMatrix",
        AmmStatus::RaggedRows => c"RaggedRows",
        AmmStatus::NonFiniteScore => c"NonFiniteScore",
        AmmStatus::TooFewAttributes => c"TooFewAttributes",
        AmmStatus::DegenerateSplit => c"DegenerateSplit",
        AmmStatus::LengthMismatch => c"LengthMismatch",
        AmmStatus::OutOfRange => c"OutOfRange",
        AmmStatus::InvalidParameter => c"InvalidParameter",
        AmmStatus::ParseError => c"ParseError",
        AmmStatus::HeaderMismatch => c"HeaderMismatch",
        AmmStatus::IoFailure => c"IoFailure",
        AmmStatus::Panic => c"Panic",
    };
    name.as_ptr()
}

/// Builds a matrix from `n_images * n_attrs` entries stored column by
/// column.
///
/// # Safety
/// `data` must point to `n_images * n_attrs` readable bytes and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_new(
    n_images: usize,
    n_attrs: usize,
    data: *const i8,
    out: *mut *mut AmmMatrix,
) -> AmmStatus {
    guard(|| {
        if n_images == 0 || n_attrs == 0 {
            return Err(Error::EmptyMatrix.into());
        }
        if data.is_null() {
            return Err(null_arg("data"));
        }
        let len = n_images
            .checked_mul(n_attrs)
            .ok_or_else(|| Failure::from(Error::InvalidParameter("matrix size overflows".into())))?;
        let flat = std::slice::from_raw_parts(data, len);
        let m = AttributeMatrix::from_columns(&flat.chunks(n_images).collect::<Vec<_>>())?;
        put(out, Box::into_raw(Box::new(AmmMatrix(m))), "out")
    })
}

/// Reads a matrix from a text file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_read(path: *const c_char, out: *mut *mut AmmMatrix) -> AmmStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let m = read_matrix(path)?;
        put(out, Box::into_raw(Box::new(AmmMatrix(m))), "out")
    })
}

/// Writes a matrix to a text file, replacing it atomically.
///
/// # Safety
/// `m` must be a live matrix handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_write(m: *const AmmMatrix, path: *const c_char) -> AmmStatus {
    guard(|| {
        let m = borrow(m, "m")?;
        let path = path_arg(path, "path")?;
        write_matrix(&m.0, path)?;
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_free(m: *mut AmmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_n_images(m: *const AmmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_images())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_n_attrs(m: *const AmmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_attrs())
}

/// Copies the entries column by column into `buf`, which must hold exactly
/// `n_images * n_attrs` bytes.
///
/// # Safety
/// `m` must be a live matrix handle and `buf` must point to `len` writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn amm_matrix_copy(m: *const AmmMatrix, buf: *mut i8, len: usize) -> AmmStatus {
    guard(|| {
        let m = borrow(m, "m")?;
        if buf.is_null() {
            return Err(null_arg("buf"));
        }
        let need = m.0.n_images() * m.0.n_attrs();
        if len != need {
            return Err(Error::LengthMismatch { left: len, right: need }.into());
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (chunk, col) in dst.chunks_mut(m.0.n_images()).zip(m.0.columns()) {
            chunk.copy_from_slice(col);
        }
        Ok(())
    })
}

/// Uniform random ±1 matrix with `n_attrs` columns.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amm_gen_noise(n_images: usize, n_attrs: usize, seed: u64, out: *mut *mut AmmMatrix) -> AmmStatus {
    guard(|| {
        if n_images == 0 || n_attrs == 0 {
            return Err(Error::EmptyMatrix.into());
        }
        let m = amm_core::calibrate::gen_noise(n_images, n_attrs, seed).ok_or(Failure::from(Error::EmptyMatrix))?;
        put(out, Box::into_raw(Box::new(AmmMatrix(m))), "out")
    })
}

/// Distance of `d` from `s`; `kind` is an [`AmmDistanceKind`] value.
///
/// # Safety
/// `s` and `d` must be live matrix handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amm_distance(
    s: *const AmmMatrix,
    d: *const AmmMatrix,
    kind: c_int,
    tol: f64,
    max_iter: usize,
    out: *mut f64,
) -> AmmStatus {
    guard(|| {
        let s = borrow(s, "s")?;
        let d = borrow(d, "d")?;
        let kind = match kind {
            0 => DistanceKind::Lsq,
            1 => DistanceKind::Cvx,
            2 => DistanceKind::Jp,
            other => return Err(Error::InvalidParameter(format!("unknown distance kind {other}")).into()),
        };
        let v = distance(kind, &s.0, &d.0, &SolverOptions { tol, max_iter })?;
        put(out, v.value, "out")
    })
}

#[no_mangle]
pub extern "C" fn amm_metric_options_default() -> AmmMetricOptions {
    let c = MetricConfig::default();
    AmmMetricOptions {
        split_ratio: c.split_ratio,
        seed: c.seed,
        trials: c.trials,
        tol: c.solver.tol,
        max_iter: c.solver.max_iter,
        full_distance: c.full_distance,
        grid: ptr::null(),
        grid_len: 0,
    }
}

/// Scores `d` against `s`. A null `opts` selects the defaults.
///
/// # Safety
/// `s` and `d` must be live matrix handles, `opts` null or valid (with
/// `grid` pointing to `grid_len` values when non-null), and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn amm_evaluate(
    s: *const AmmMatrix,
    d: *const AmmMatrix,
    opts: *const AmmMetricOptions,
    out: *mut *mut AmmReport,
) -> AmmStatus {
    guard(|| {
        let s = borrow(s, "s")?;
        let d = borrow(d, "d")?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let o = opts.as_ref().copied().unwrap_or_else(|| amm_metric_options_default());
        let grid = if o.grid.is_null() {
            None
        } else {
            Some(std::slice::from_raw_parts(o.grid, o.grid_len).to_vec())
        };
        let config = MetricConfig {
            split_ratio: o.split_ratio,
            seed: o.seed,
            grid,
            trials: o.trials,
            solver: SolverOptions { tol: o.tol, max_iter: o.max_iter },
            full_distance: o.full_distance,
            ..MetricConfig::default()
        };
        let report = evaluate_meaningfulness(&s.0, &d.0, &config)?;
        put(out, Box::into_raw(Box::new(AmmReport(report))), "out")
    })
}

/// Writes the three scores; any output pointer may be null.
///
/// # Safety
/// `r` must be a live report handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn amm_report_gammas(
    r: *const AmmReport,
    gamma_cvx: *mut f64,
    gamma_jp: *mut f64,
    gamma_tilde: *mut f64,
) -> AmmStatus {
    guard(|| {
        let r = &borrow(r, "r")?.0;
        for (p, v) in [(gamma_cvx, r.gamma_cvx), (gamma_jp, r.gamma_jp), (gamma_tilde, r.gamma_tilde)] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Writes the saturation and degradation flags; any output pointer may be
/// null.
///
/// # Safety
/// `r` must be a live report handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn amm_report_flags(
    r: *const AmmReport,
    saturated_cvx: *mut bool,
    saturated_jp: *mut bool,
    degraded: *mut bool,
) -> AmmStatus {
    guard(|| {
        let r = &borrow(r, "r")?.0;
        for (p, v) in [(saturated_cvx, r.saturated_cvx), (saturated_jp, r.saturated_jp), (degraded, r.degraded)] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// The full report as JSON. Release the string with [`amm_string_free`].
///
/// # Safety
/// `r` must be a live report handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn amm_report_json(r: *const AmmReport, out: *mut *mut c_char) -> AmmStatus {
    guard(|| {
        let r = borrow(r, "r")?;
        let json = report_to_json(&r.0)?;
        let s = CString::new(json).map_err(|_| Failure(AmmStatus::Panic, "report contains NUL".into()))?;
        put(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amm_report_free(r: *mut AmmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
