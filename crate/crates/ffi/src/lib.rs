//! C interface to the `adrt` library.
//!
//! Images are opaque `AdrtImage` handles owned by the caller and released
//! with [`adrt_image_free`]. Every fallible function returns an
//! [`AdrtStatus`]; on failure [`adrt_last_error`] describes the problem for
//! the calling thread. Output handles are only written on success.
//!
//! Values are addressed as `(h, j)` with `h` the height (row) and `j` the
//! column or slope. Bulk copies use row-major order over the window
//! `[lo, hi)`, i.e. `(hi - lo) * width` values.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adrt::format::{read_image, write_any, AnyImage};
use adrt::{
    backproject, constraint_count, forward, inverse_with, validate, AdrtError, InverseOptions, Kind,
    SquareImage, StripImage,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdrtStatus {
    Ok = 0,
    Argument = 1,
    Overflow = 2,
    Clip = 3,
    OutOfRange = 4,
    Format = 5,
    Io = 6,
    NullPointer = 7,
    Dtype = 8,
    Inconsistent = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdrtDtype {
    I64 = 0,
    F64 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdrtKind {
    Image = 0,
    Sino = 1,
}

/// Shape of an image handle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdrtInfo {
    pub n: u32,
    pub width: usize,
    pub lo: i64,
    pub hi: i64,
    pub dtype: AdrtDtype,
    pub kind: AdrtKind,
}

/// Summary of a range validation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrtValidation {
    pub passed: bool,
    pub total: usize,
    pub mass_count: usize,
    pub support_count: usize,
    pub violations: usize,
    pub outside_support: usize,
    pub max_abs: f64,
}

/// Opaque image handle.
pub struct AdrtImage(AnyImage);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &AdrtError) -> AdrtStatus {
    match e {
        AdrtError::Argument(_) => AdrtStatus::Argument,
        AdrtError::Overflow(_) => AdrtStatus::Overflow,
        AdrtError::Clip { .. } => AdrtStatus::Clip,
        AdrtError::OutOfRange { .. } => AdrtStatus::OutOfRange,
        AdrtError::Inconsistent => AdrtStatus::Inconsistent,
        AdrtError::Format { .. } => AdrtStatus::Format,
        AdrtError::Io(_) => AdrtStatus::Io,
    }
}

struct Failure(AdrtStatus, String);

impl From<AdrtError> for Failure {
    fn from(e: AdrtError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AdrtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AdrtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AdrtStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(AdrtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a>(img: *const AdrtImage) -> Result<&'a AnyImage, Failure> {
    img.as_ref().map(|h| &h.0).ok_or_else(|| null("image"))
}

unsafe fn emit(out: *mut *mut AdrtImage, img: AnyImage) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(AdrtImage(img)));
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(AdrtStatus::Argument, "path is not UTF-8".into()))
}

fn kind_of(k: AdrtKind) -> Kind {
    match k {
        AdrtKind::Image => Kind::Image,
        AdrtKind::Sino => Kind::Sino,
    }
}

fn wrong_dtype() -> Failure {
    Failure(AdrtStatus::Dtype, "element type does not match the image".into())
}

/// Message for the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn adrt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn adrt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Zero image of scale `n` on the height window `[lo, hi)`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_new(
    n: u32,
    lo: i64,
    hi: i64,
    dtype: AdrtDtype,
    kind: AdrtKind,
    out: *mut *mut AdrtImage,
) -> AdrtStatus {
    guard(|| {
        let img = match dtype {
            AdrtDtype::I64 => AnyImage::I64(StripImage::zeros(n, lo, hi, kind_of(kind))?),
            AdrtDtype::F64 => AnyImage::F64(StripImage::zeros(n, lo, hi, kind_of(kind))?),
        };
        emit(out, img)
    })
}

/// Square integer image from `4^n` row-major values.
///
/// # Safety
/// `data` must point to `4^n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_from_square_i64(
    n: u32,
    data: *const i64,
    out: *mut *mut AdrtImage,
) -> AdrtStatus {
    guard(|| {
        let f = square_from(n, data)?;
        emit(out, AnyImage::I64(f.embed()))
    })
}

/// Square float image from `4^n` row-major values.
///
/// # Safety
/// `data` must point to `4^n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_from_square_f64(
    n: u32,
    data: *const f64,
    out: *mut *mut AdrtImage,
) -> AdrtStatus {
    guard(|| {
        let f = square_from(n, data)?;
        emit(out, AnyImage::F64(f.embed()))
    })
}

unsafe fn square_from<T: adrt::Sample>(n: u32, data: *const T) -> Result<SquareImage<T>, Failure> {
    if data.is_null() {
        return Err(null("data"));
    }
    let probe = SquareImage::<T>::zeros(n)?;
    let size = probe.size();
    let values = std::slice::from_raw_parts(data, size * size);
    Ok(SquareImage::from_fn(n, |i, j| values[i * size + j])?)
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `img` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_free(img: *mut AdrtImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Deep copy.
///
/// # Safety
/// `img` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_clone(
    img: *const AdrtImage,
    out: *mut *mut AdrtImage,
) -> AdrtStatus {
    guard(|| emit(out, handle(img)?.clone()))
}

/// # Safety
/// `img` must be a live handle; `info` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_info(img: *const AdrtImage, info: *mut AdrtInfo) -> AdrtStatus {
    guard(|| {
        let img = handle(img)?;
        let info = info.as_mut().ok_or_else(|| null("info"))?;
        let (n, width, lo, hi, kind) = match img {
            AnyImage::I64(f) => (f.n(), f.width(), f.lo(), f.hi(), f.kind()),
            AnyImage::F64(f) => (f.n(), f.width(), f.lo(), f.hi(), f.kind()),
        };
        *info = AdrtInfo {
            n,
            width,
            lo,
            hi,
            dtype: match img {
                AnyImage::I64(_) => AdrtDtype::I64,
                AnyImage::F64(_) => AdrtDtype::F64,
            },
            kind: match kind {
                Kind::Image => AdrtKind::Image,
                Kind::Sino => AdrtKind::Sino,
            },
        };
        Ok(())
    })
}

fn check_column(width: usize, j: usize) -> Result<(), Failure> {
    if j >= width {
        return Err(Failure(
            AdrtStatus::Argument,
            format!("column {j} out of range for width {width}"),
        ));
    }
    Ok(())
}

/// Value at `(h, j)`; zero outside the window.
///
/// # Safety
/// `img` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_get_i64(
    img: *const AdrtImage,
    h: i64,
    j: usize,
    value: *mut i64,
) -> AdrtStatus {
    guard(|| {
        let AnyImage::I64(f) = handle(img)? else { return Err(wrong_dtype()) };
        check_column(f.width(), j)?;
        *value.as_mut().ok_or_else(|| null("value"))? = f.get(h, j);
        Ok(())
    })
}

/// # Safety
/// `img` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_get_f64(
    img: *const AdrtImage,
    h: i64,
    j: usize,
    value: *mut f64,
) -> AdrtStatus {
    guard(|| {
        let AnyImage::F64(f) = handle(img)? else { return Err(wrong_dtype()) };
        check_column(f.width(), j)?;
        *value.as_mut().ok_or_else(|| null("value"))? = f.get(h, j);
        Ok(())
    })
}

/// # Safety
/// `img` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_set_i64(img: *mut AdrtImage, h: i64, j: usize, value: i64) -> AdrtStatus {
    guard(|| {
        let img = img.as_mut().ok_or_else(|| null("image"))?;
        let AnyImage::I64(f) = &mut img.0 else { return Err(wrong_dtype()) };
        check_column(f.width(), j)?;
        Ok(f.set(h, j, value)?)
    })
}

/// # Safety
/// `img` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_set_f64(img: *mut AdrtImage, h: i64, j: usize, value: f64) -> AdrtStatus {
    guard(|| {
        let img = img.as_mut().ok_or_else(|| null("image"))?;
        let AnyImage::F64(f) = &mut img.0 else { return Err(wrong_dtype()) };
        check_column(f.width(), j)?;
        Ok(f.set(h, j, value)?)
    })
}

unsafe fn copy_out<T: adrt::Sample>(f: &StripImage<T>, buf: *mut T, len: usize) -> Result<(), Failure> {
    let values = f.to_row_major();
    if len < values.len() {
        return Err(Failure(
            AdrtStatus::Argument,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Copies the window row-major into `buf`, which holds `len` values.
///
/// # Safety
/// `img` must be a live handle; `buf` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_copy_i64(img: *const AdrtImage, buf: *mut i64, len: usize) -> AdrtStatus {
    guard(|| {
        let AnyImage::I64(f) = handle(img)? else { return Err(wrong_dtype()) };
        copy_out(f, buf, len)
    })
}

/// # Safety
/// `img` must be a live handle; `buf` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn adrt_image_copy_f64(img: *const AdrtImage, buf: *mut f64, len: usize) -> AdrtStatus {
    guard(|| {
        let AnyImage::F64(f) = handle(img)? else { return Err(wrong_dtype()) };
        copy_out(f, buf, len)
    })
}

/// Single-quadrant transform of a square image; the result has the window
/// `[-(N - 1), N)`.
///
/// # Safety
/// `img` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_forward(img: *const AdrtImage, out: *mut *mut AdrtImage) -> AdrtStatus {
    guard(|| {
        let g = match handle(img)? {
            AnyImage::I64(f) => AnyImage::I64(forward(&f.to_square()?)?),
            AnyImage::F64(f) => AnyImage::F64(forward(&f.to_square()?)?),
        };
        emit(out, g)
    })
}

/// Exact inverse. Without `allow_out_of_range`, sinograms outside the range
/// fail with `ADRT_STATUS_OUT_OF_RANGE`; with it, offending values are
/// dropped. `tol` is the relative zero threshold for float data.
///
/// # Safety
/// `img` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_inverse(
    img: *const AdrtImage,
    allow_out_of_range: bool,
    tol: f64,
    out: *mut *mut AdrtImage,
) -> AdrtStatus {
    guard(|| {
        let opts = InverseOptions {
            allow_out_of_range,
            tol,
        };
        let f = match handle(img)? {
            AnyImage::I64(g) => AnyImage::I64(inverse_with(g, opts)?.image.embed()),
            AnyImage::F64(g) => AnyImage::F64(inverse_with(g, opts)?.image.embed()),
        };
        emit(out, f)
    })
}

/// Back-projection through levels `m..1`; the window grows upward by
/// `2^m - 1`.
///
/// # Safety
/// `img` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_backproject(img: *const AdrtImage, m: u32, out: *mut *mut AdrtImage) -> AdrtStatus {
    guard(|| {
        let f = match handle(img)? {
            AnyImage::I64(g) => AnyImage::I64(backproject(g, m)?),
            AnyImage::F64(g) => AnyImage::F64(backproject(g, m)?),
        };
        emit(out, f)
    })
}

/// Range validation. `tol` only applies to float data.
///
/// # Safety
/// `img` must be a live handle; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_validate(
    img: *const AdrtImage,
    tol: f64,
    report: *mut AdrtValidation,
) -> AdrtStatus {
    guard(|| {
        let report = report.as_mut().ok_or_else(|| null("report"))?;
        *report = match handle(img)? {
            AnyImage::I64(g) => summary(&validate(g, tol)?),
            AnyImage::F64(g) => summary(&validate(g, tol)?),
        };
        Ok(())
    })
}

fn summary<T: adrt::Sample>(r: &adrt::RangeReport<T>) -> AdrtValidation {
    AdrtValidation {
        passed: r.passed,
        total: r.total(),
        mass_count: r.mass_count,
        support_count: r.support_count,
        violations: r.violations(),
        outside_support: r.outside_support.len(),
        max_abs: r.max_abs,
    }
}

/// Number of range constraints at scale `n`, `N (N - 1) / 2`.
#[no_mangle]
pub extern "C" fn adrt_constraint_count(n: u32) -> u64 {
    if n > 31 {
        return 0;
    }
    constraint_count(n).total
}

/// Reads a text or binary `ADRT1` file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adrt_read_file(path: *const c_char, out: *mut *mut AdrtImage) -> AdrtStatus {
    guard(|| {
        let path = path_arg(path)?;
        let file = File::open(&path).map_err(|e| Failure(AdrtStatus::Io, format!("{path}: {e}")))?;
        emit(out, read_image(BufReader::new(file))?)
    })
}

/// Writes an `ADRT1` file, text unless `binary` is set.
///
/// # Safety
/// `img` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn adrt_write_file(img: *const AdrtImage, path: *const c_char, binary: bool) -> AdrtStatus {
    guard(|| {
        let img = handle(img)?;
        let path = path_arg(path)?;
        let file = File::create(&path).map_err(|e| Failure(AdrtStatus::Io, format!("{path}: {e}")))?;
        let mut w = BufWriter::new(file);
        write_any(img, binary, &mut w)?;
        w.flush().map_err(|e| Failure(AdrtStatus::Io, e.to_string()))?;
        Ok(())
    })
}
