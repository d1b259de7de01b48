//! C ABI over `imbal-core`.
//!
//! Objects are opaque heap handles created by `imbal_*_new`/`imbal_*_fit*`
//! and released with the matching `imbal_*_free`. Every fallible call returns
//! an [`ImbalStatus`]; on failure a description is available from
//! [`imbal_last_error_message`] on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use imbal_core::glm::{fit_glm, BinaryDataset, GlmFit};
use imbal_core::ppp::{fit_additive_smoothing_counts, CovariateDistribution, FitOptions, PointProcessFit};
use imbal_core::{Error, LinkFamily};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImbalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Input data violate a model requirement (single class, degenerate
    /// support, point outside the support, ...).
    InvalidData = 3,
    /// The maximum likelihood estimate does not exist (separation or
    /// divergence with `kappa = 0`).
    Divergence = 4,
    NumericalFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A link family, e.g. parsed from `"logistic"` or `"t-logistic:1.5"`.
pub struct ImbalLink(LinkFamily);

/// A binary-response dataset with `m` rows and `p` covariates.
pub struct ImbalDataset(BinaryDataset);

/// A finitely supported covariate distribution.
pub struct ImbalDistribution(CovariateDistribution);

pub struct ImbalGlmFit(GlmFit);

pub struct ImbalPppFit(PointProcessFit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> ImbalStatus {
    match e {
        Error::InvalidArgument(_) | Error::UnknownLink(_) => ImbalStatus::InvalidArgument,
        Error::PerfectSeparation { .. } | Error::Divergence { .. } => ImbalStatus::Divergence,
        Error::RootNotConverged(_) => ImbalStatus::NumericalFailure,
        _ => ImbalStatus::InvalidData,
    }
}

/// Runs `f`, records errors and panics, and returns the status.
fn guard(f: impl FnOnce() -> Result<(), (ImbalStatus, String)>) -> ImbalStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImbalStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ImbalStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (ImbalStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(name: &str) -> (ImbalStatus, String) {
    (ImbalStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (ImbalStatus, String)> {
    p.as_ref().ok_or_else(|| null_err(name))
}

unsafe fn input_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (ImbalStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null_err(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, v: T, name: &str) -> Result<(), (ImbalStatus, String)> {
    if out.is_null() {
        return Err(null_err(name));
    }
    out.write(v);
    Ok(())
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize, name: &str) -> Result<(), (ImbalStatus, String)> {
    if len < src.len() {
        return Err((
            ImbalStatus::BufferTooSmall,
            format!("`{name}` holds {len} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err(null_err(name));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next `imbal_*` call on the same thread.
#[no_mangle]
pub extern "C" fn imbal_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn imbal_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The q-exponential `[1 + (1-q) z]_+^{1/(1-q)}` (`exp(z)` at `q = 1`).
#[no_mangle]
pub extern "C" fn imbal_exp_q(z: f64, q: f64) -> f64 {
    imbal_core::exp_q(z, q)
}

/// `log exp_q(z)`.
#[no_mangle]
pub extern "C" fn imbal_ln_exp_q(z: f64, q: f64) -> f64 {
    imbal_core::ln_exp_q(z, q)
}

/// Parses a link tag into a new handle.
///
/// # Safety
/// `tag` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_link_parse(tag: *const c_char, out: *mut *mut ImbalLink) -> ImbalStatus {
    guard(|| {
        if tag.is_null() {
            return Err(null_err("tag"));
        }
        let s = CStr::from_ptr(tag)
            .to_str()
            .map_err(|_| (ImbalStatus::InvalidArgument, "tag is not UTF-8".to_string()))?;
        let link: LinkFamily = s.parse().map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(ImbalLink(link))), "out")
    })
}

/// # Safety
/// `link` must be NULL or a handle from [`imbal_link_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imbal_link_free(link: *mut ImbalLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Lower tail index `q` of the link's distribution.
///
/// # Safety
/// `link` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_link_tail_index(link: *const ImbalLink, out: *mut f64) -> ImbalStatus {
    guard(|| write_out(out, deref(link, "link")?.0.tail_index(), "out"))
}

/// `G(z)`.
///
/// # Safety
/// `link` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_link_cdf(link: *const ImbalLink, z: f64, out: *mut f64) -> ImbalStatus {
    guard(|| write_out(out, deref(link, "link")?.0.cdf(z), "out"))
}

/// Normalizing constants `(q, c_m, d_m)` with `m G(c_m + d_m z) -> exp_q(z)`.
///
/// # Safety
/// `link` must be a live handle; the three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_link_normalizing(
    link: *const ImbalLink,
    m: u64,
    q_out: *mut f64,
    c_out: *mut f64,
    d_out: *mut f64,
) -> ImbalStatus {
    guard(|| {
        let t = imbal_core::deformed::normalizing_sequence(&deref(link, "link")?.0, m).map_err(core_err)?;
        write_out(q_out, t.q, "q_out")?;
        write_out(c_out, t.c, "c_out")?;
        write_out(d_out, t.d, "d_out")
    })
}

/// Builds a dataset from row-major covariates `x` (`m * p` values) and
/// labels `y` (`m` values, nonzero = positive).
///
/// # Safety
/// `x` must hold `m * p` readable values, `y` `m` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_dataset_new(
    x: *const f64,
    y: *const u8,
    m: usize,
    p: usize,
    out: *mut *mut ImbalDataset,
) -> ImbalStatus {
    guard(|| {
        let len = m
            .checked_mul(p)
            .ok_or_else(|| (ImbalStatus::InvalidArgument, "m * p overflows".to_string()))?;
        let x = input_slice(x, len, "x")?;
        let y = input_slice(y, m, "y")?;
        let rows = if p == 0 { vec![Vec::new(); m] } else { x.chunks(p).map(<[f64]>::to_vec).collect() };
        let data = BinaryDataset::new(rows, y.iter().map(|&v| v != 0).collect()).map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(ImbalDataset(data))), "out")
    })
}

/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imbal_dataset_free(data: *mut ImbalDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Builds a distribution from `len` row-major support points of dimension
/// `p` and their weights (positive, summing to one).
///
/// # Safety
/// `points` must hold `len * p` values, `weights` `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_distribution_new(
    points: *const f64,
    weights: *const f64,
    len: usize,
    p: usize,
    out: *mut *mut ImbalDistribution,
) -> ImbalStatus {
    guard(|| {
        if p == 0 {
            return Err((ImbalStatus::InvalidArgument, "dimension must be positive".into()));
        }
        let total = len
            .checked_mul(p)
            .ok_or_else(|| (ImbalStatus::InvalidArgument, "len * p overflows".to_string()))?;
        let pts = input_slice(points, total, "points")?;
        let w = input_slice(weights, len, "weights")?;
        let dist = CovariateDistribution::new(pts.chunks(p).map(<[f64]>::to_vec).collect(), w.to_vec())
            .map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(ImbalDistribution(dist))), "out")
    })
}

/// Empirical distribution of a dataset's covariates.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_distribution_from_dataset(
    data: *const ImbalDataset,
    out: *mut *mut ImbalDistribution,
) -> ImbalStatus {
    guard(|| {
        let dist = CovariateDistribution::from_dataset(&deref(data, "data")?.0).map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(ImbalDistribution(dist))), "out")
    })
}

/// Number of support points.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_distribution_len(dist: *const ImbalDistribution, out: *mut usize) -> ImbalStatus {
    guard(|| write_out(out, deref(dist, "dist")?.0.len(), "out"))
}

/// # Safety
/// `dist` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imbal_distribution_free(dist: *mut ImbalDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Fits the binomial regression model. `kappa < 0` means no penalty.
///
/// # Safety
/// `data` and `link` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_glm_fit(
    data: *const ImbalDataset,
    link: *const ImbalLink,
    kappa: f64,
    out: *mut *mut ImbalGlmFit,
) -> ImbalStatus {
    guard(|| {
        let data = deref(data, "data")?;
        let link = deref(link, "link")?;
        let kappa = if kappa < 0.0 { None } else { Some(kappa) };
        let fit = fit_glm(&data.0, &link.0, kappa).map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(ImbalGlmFit(fit))), "out")
    })
}

/// Raw coefficients `a` and `b` (`b_len >= p`).
///
/// # Safety
/// `fit` must be a live handle; `a_out` writable; `b_out` must hold `b_len` values.
#[no_mangle]
pub unsafe extern "C" fn imbal_glm_fit_coefficients(
    fit: *const ImbalGlmFit,
    a_out: *mut f64,
    b_out: *mut f64,
    b_len: usize,
) -> ImbalStatus {
    guard(|| {
        let c = &deref(fit, "fit")?.0.coefficients;
        copy_out(&c.b, b_out, b_len, "b_out")?;
        write_out(a_out, c.a, "a_out")
    })
}

/// Coefficients on the normalized scale at sample size `m`.
///
/// # Safety
/// `fit` must be a live handle; `alpha_out` writable; `beta_out` must hold `beta_len` values.
#[no_mangle]
pub unsafe extern "C" fn imbal_glm_fit_normalized(
    fit: *const ImbalGlmFit,
    m: u64,
    alpha_out: *mut f64,
    beta_out: *mut f64,
    beta_len: usize,
) -> ImbalStatus {
    guard(|| {
        let n = deref(fit, "fit")?.0.normalized(m).map_err(core_err)?;
        copy_out(&n.beta, beta_out, beta_len, "beta_out")?;
        write_out(alpha_out, n.alpha, "alpha_out")
    })
}

/// Maximized log-likelihood (without the penalty).
///
/// # Safety
/// `fit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_glm_fit_log_likelihood(fit: *const ImbalGlmFit, out: *mut f64) -> ImbalStatus {
    guard(|| write_out(out, deref(fit, "fit")?.0.log_likelihood, "out"))
}

/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imbal_glm_fit_free(fit: *mut ImbalGlmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Additive-smoothing point-process fit from event counts at each support
/// point (`len` must equal the support size).
///
/// # Safety
/// `dist` must be a live handle, `counts` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_ppp_fit_counts(
    q: f64,
    dist: *const ImbalDistribution,
    counts: *const u64,
    len: usize,
    kappa: f64,
    out: *mut *mut ImbalPppFit,
) -> ImbalStatus {
    guard(|| {
        let dist = deref(dist, "dist")?;
        let counts = input_slice(counts, len, "counts")?;
        let fit = fit_additive_smoothing_counts(q, &dist.0, counts, kappa, &FitOptions::default()).map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(ImbalPppFit(fit))), "out")
    })
}

/// Fitted `alpha` and `beta` (`beta_len >= p`).
///
/// # Safety
/// `fit` must be a live handle; `alpha_out` writable; `beta_out` must hold `beta_len` values.
#[no_mangle]
pub unsafe extern "C" fn imbal_ppp_fit_params(
    fit: *const ImbalPppFit,
    alpha_out: *mut f64,
    beta_out: *mut f64,
    beta_len: usize,
) -> ImbalStatus {
    guard(|| {
        let f = &deref(fit, "fit")?.0;
        copy_out(f.beta(), beta_out, beta_len, "beta_out")?;
        write_out(alpha_out, f.alpha(), "alpha_out")
    })
}

/// Fitted total intensity `Lambda`.
///
/// # Safety
/// `fit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbal_ppp_fit_total_intensity(fit: *const ImbalPppFit, out: *mut f64) -> ImbalStatus {
    guard(|| write_out(out, deref(fit, "fit")?.0.total_intensity, "out"))
}

/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imbal_ppp_fit_free(fit: *mut ImbalPppFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}
