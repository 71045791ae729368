//! C ABI over the magweyl lattice calculus.
//!
//! Every entry point returns an [`MwStatus`]; results come back through out
//! pointers. Objects are opaque handles owned by the caller and released with
//! the matching `*_free`. The message of the last failure on the calling
//! thread is available from [`mw_last_error`]. Panics never cross the boundary.

use magweyl::grid::{GridSpec, PhaseSymbol};
use magweyl::harness::report::{render, Format, Report};
use magweyl::harness::{run_suite, SuiteConfig};
use magweyl::magnetics::VectorPotential;
use magweyl::products::{gaussian_symbol, moyal_product, ProductRoute};
use magweyl::weyl::{Calculus, Params};
use magweyl::Error;
use num_complex::Complex64 as C64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Outcome of a call; zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Unsupported = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Vector potential family for [`mw_calculus_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwPotential {
    Zero = 0,
    /// `A = b x₁` in `d = 1`, `(0, b x₁)` in `d = 2`.
    Landau = 1,
    /// `(−b x₂/2, b x₁/2)`, `d = 2` only.
    Symmetric = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwRoute {
    Operator = 0,
    Quadrature = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwFormat {
    Json = 0,
    Csv = 1,
}

/// A calculus: lattice, `ε`, `λ` and vector potential.
pub struct MwCalculus(Calculus);

/// A phase-space symbol on a calculus lattice.
pub struct MwSymbol(PhaseSymbol);

/// A verification report.
pub struct MwReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> MwStatus {
    match e {
        Error::Config(_) => MwStatus::Config,
        Error::Io(_) => MwStatus::Io,
        Error::UnsupportedDimension(_) | Error::FieldClass(_) | Error::MissingPotential | Error::DenseCap(_) | Error::RequiresUnitEps(_) | Error::CostRefused { .. } => {
            MwStatus::Unsupported
        }
        _ => MwStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics; clears the message on success.
fn guard(f: impl FnOnce() -> Result<(), (MwStatus, String)>) -> MwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MwStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            MwStatus::Panic
        }
    }
}

fn lib<T>(r: magweyl::Result<T>) -> Result<T, (MwStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

/// Enum arguments arrive as `int` so an out-of-range value is an error, not UB.
fn bad_enum(what: &str, v: i32) -> (MwStatus, String) {
    (MwStatus::InvalidArgument, format!("unknown {what} {v}"))
}

fn null(what: &str) -> (MwStatus, String) {
    (MwStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or points to a live `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MwStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or valid for `len` reads.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (MwStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` is null or valid for `len` writes.
unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (MwStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// # Safety
/// `out` is null or valid for one write.
unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), (MwStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// # Safety
/// `out` is null or valid for one write.
unsafe fn set<T>(out: *mut T, what: &str, v: T) -> Result<(), (MwStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = v;
    Ok(())
}

/// Copies `text` and its terminating NUL into `buf`; `needed` receives the
/// full size including the NUL even when `buf` is too small.
///
/// # Safety
/// `buf` is valid for `len` writes or null with `len = 0`; `needed` is null or writable.
unsafe fn write_text(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), (MwStatus, String)> {
    let n = text.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if len < n {
        return Err((MwStatus::BufferTooSmall, format!("buffer holds {len} bytes, {n} needed")));
    }
    let out = slice_mut(buf, n, "buf")?;
    for (o, b) in out.iter_mut().zip(text.bytes()) {
        *o = b as c_char;
    }
    out[n - 1] = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread (empty after a success).
///
/// # Safety
/// `buf` is writable for `len` bytes (or null with `len = 0`); `needed` is
/// null or writable and receives the size including the NUL.
#[no_mangle]
pub unsafe extern "C" fn mw_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> MwStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match write_text(&msg, buf, len, needed) {
        Ok(()) => MwStatus::Ok,
        Err((s, _)) => s,
    }
}

/// New calculus on the `d`-dimensional lattice with `n` sites of box length `l`;
/// `potential` is an [`MwPotential`] value.
///
/// # Safety
/// `out` is writable; the handle is released with [`mw_calculus_free`].
#[no_mangle]
pub unsafe extern "C" fn mw_calculus_new(d: usize, n: usize, l: f64, eps: f64, lambda: f64, potential: i32, b: f64, out: *mut *mut MwCalculus) -> MwStatus {
    guard(|| {
        let grid = lib(GridSpec::new(d, n, l))?;
        let a = match potential {
            p if p == MwPotential::Zero as i32 => VectorPotential::Zero { d },
            p if p == MwPotential::Landau as i32 => VectorPotential::Landau { d, b },
            p if p == MwPotential::Symmetric as i32 => VectorPotential::Symmetric { b },
            p => return Err(bad_enum("potential", p)),
        };
        let c = lib(Calculus::new(grid, lib(Params::new(eps, lambda))?, a))?;
        put(out, MwCalculus(c))
    })
}

/// # Safety
/// `c` is null or a handle from [`mw_calculus_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mw_calculus_free(c: *mut MwCalculus) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of position sites `n^d`; operator matrices are `npos × npos`.
///
/// # Safety
/// `c` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_calculus_npos(c: *const MwCalculus, out: *mut usize) -> MwStatus {
    guard(|| {
        let c = deref(c, "calculus")?;
        set(out, "out", c.0.grid.npos())?;
        Ok(())
    })
}

/// Number of phase-space sites `n^{2d}`, the length of a symbol.
///
/// # Safety
/// `c` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_calculus_nphase(c: *const MwCalculus, out: *mut usize) -> MwStatus {
    guard(|| {
        let c = deref(c, "calculus")?;
        set(out, "out", c.0.grid.nphase())?;
        Ok(())
    })
}

/// Gaussian symbol with `d` center and `d` momentum components.
///
/// # Safety
/// `center` and `momentum` hold `d` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_symbol_gaussian(c: *const MwCalculus, center: *const f64, momentum: *const f64, width: f64, out: *mut *mut MwSymbol) -> MwStatus {
    guard(|| {
        let c = deref(c, "calculus")?;
        let d = c.0.grid.d;
        let (x, xi) = (slice(center, d, "center")?, slice(momentum, d, "momentum")?);
        if !(width > 0.0 && width.is_finite()) {
            return Err((MwStatus::InvalidArgument, format!("width must be positive (got {width})")));
        }
        put(out, MwSymbol(gaussian_symbol(c.0.grid, x, xi, width)))
    })
}

/// Symbol from `len` real and imaginary parts in phase-index order.
///
/// # Safety
/// `re` and `im` hold `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_symbol_from_values(c: *const MwCalculus, re: *const f64, im: *const f64, len: usize, out: *mut *mut MwSymbol) -> MwStatus {
    guard(|| {
        let c = deref(c, "calculus")?;
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        let v = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        put(out, MwSymbol(lib(PhaseSymbol::from_values(c.0.grid, v))?))
    })
}

/// Copies the symbol values; `len` must equal the symbol length.
///
/// # Safety
/// `re` and `im` are writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_symbol_values(s: *const MwSymbol, re: *mut f64, im: *mut f64, len: usize) -> MwStatus {
    guard(|| {
        let s = deref(s, "symbol")?;
        let n = s.0.values.len();
        if len != n {
            return Err((MwStatus::BufferTooSmall, format!("symbol has {n} values, buffers hold {len}")));
        }
        let (re, im) = (slice_mut(re, n, "re")?, slice_mut(im, n, "im")?);
        for ((r, i), v) in re.iter_mut().zip(im.iter_mut()).zip(&s.0.values) {
            *r = v.re;
            *i = v.im;
        }
        Ok(())
    })
}

/// # Safety
/// `s` is null or a symbol handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mw_symbol_free(s: *mut MwSymbol) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Row-major matrix of `op(f)`; `len` must be `npos²`.
///
/// # Safety
/// Handles are live; `re` and `im` are writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_quantize(c: *const MwCalculus, f: *const MwSymbol, re: *mut f64, im: *mut f64, len: usize) -> MwStatus {
    guard(|| {
        let (c, f) = (deref(c, "calculus")?, deref(f, "symbol")?);
        let op = lib(c.0.quantize(&f.0))?;
        let n = op.mat.nrows();
        if len != n * n {
            return Err((MwStatus::BufferTooSmall, format!("matrix has {} entries, buffers hold {len}", n * n)));
        }
        let (re, im) = (slice_mut(re, len, "re")?, slice_mut(im, len, "im")?);
        for i in 0..n {
            for j in 0..n {
                let v = op.mat[(i, j)];
                re[i * n + j] = v.re;
                im[i * n + j] = v.im;
            }
        }
        Ok(())
    })
}

/// Magnetic Moyal product `f ⋆ g` along `route`, an [`MwRoute`] value.
///
/// # Safety
/// Handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_moyal_product(c: *const MwCalculus, f: *const MwSymbol, g: *const MwSymbol, route: i32, out: *mut *mut MwSymbol) -> MwStatus {
    guard(|| {
        let (c, f, g) = (deref(c, "calculus")?, deref(f, "f")?, deref(g, "g")?);
        let route = match route {
            r if r == MwRoute::Operator as i32 => ProductRoute::Operator,
            r if r == MwRoute::Quadrature as i32 => ProductRoute::Quadrature,
            r => return Err(bad_enum("route", r)),
        };
        put(out, MwSymbol(lib(moyal_product(&c.0, &f.0, &g.0, route))?))
    })
}

/// Runs the suites of a TOML config (null for the defaults).
///
/// # Safety
/// `config` is null or a NUL-terminated UTF-8 string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_suite_run(config: *const c_char, out: *mut *mut MwReport) -> MwStatus {
    guard(|| {
        let cfg = if config.is_null() {
            SuiteConfig::default()
        } else {
            let text = CStr::from_ptr(config).to_str().map_err(|e| (MwStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
            lib(SuiteConfig::from_toml(text))?
        };
        put(out, MwReport(lib(run_suite(&cfg))?))
    })
}

/// Number of checks in the report.
///
/// # Safety
/// `r` is live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_len(r: *const MwReport, out: *mut usize) -> MwStatus {
    guard(|| {
        let r = deref(r, "report")?;
        set(out, "out", r.0.checks.len())?;
        Ok(())
    })
}

/// Residual, tolerance and verdict of check `index`.
///
/// # Safety
/// `r` is live; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_check(r: *const MwReport, index: usize, residual: *mut f64, tol: *mut f64, pass: *mut bool) -> MwStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let c = r.0.checks.get(index).ok_or_else(|| (MwStatus::InvalidArgument, format!("check index {index} out of range")))?;
        set(residual, "residual", c.residual)?;
        set(tol, "tol", c.tol)?;
        set(pass, "pass", c.pass)?;
        Ok(())
    })
}

/// Id of check `index` as a NUL-terminated string.
///
/// # Safety
/// `r` is live; `buf` and `needed` as for [`mw_last_error`].
#[no_mangle]
pub unsafe extern "C" fn mw_report_check_id(r: *const MwReport, index: usize, buf: *mut c_char, len: usize, needed: *mut usize) -> MwStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let c = r.0.checks.get(index).ok_or_else(|| (MwStatus::InvalidArgument, format!("check index {index} out of range")))?;
        write_text(&c.id, buf, len, needed)
    })
}

/// The report rendered in `format`, an [`MwFormat`] value.
///
/// # Safety
/// `r` is live; `buf` and `needed` as for [`mw_last_error`].
#[no_mangle]
pub unsafe extern "C" fn mw_report_render(r: *const MwReport, format: i32, buf: *mut c_char, len: usize, needed: *mut usize) -> MwStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let f = match format {
            f if f == MwFormat::Json as i32 => Format::Json,
            f if f == MwFormat::Csv as i32 => Format::Csv,
            f => return Err(bad_enum("format", f)),
        };
        write_text(&lib(render(&r.0, f))?, buf, len, needed)
    })
}

/// # Safety
/// `r` is null or a report handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mw_report_free(r: *mut MwReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
