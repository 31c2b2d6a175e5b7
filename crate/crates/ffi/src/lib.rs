//! C ABI over `dfc-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_parse` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`DfcStatus`]; on failure [`dfc_last_error_message`] describes the error
//! for the calling thread. Output buffers are caller-allocated: a call with
//! a too-small buffer returns `DFC_STATUS_BUFFER_TOO_SMALL` after storing
//! the required length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dfc_core::cycles::{find_cycles, Cycle};
use dfc_core::resultant::has_repeated_roots;
use dfc_core::roots::poly_roots;
use dfc_core::sim::simulate;
use dfc_core::spectrum::{build_jacobian, char_poly_closed};
use dfc_core::stability::{jury_stable, min_n_to_stabilize, spectral_radius, stable_mu_interval};
use dfc_core::{Error, GainScheme, GainVector, MapSpec, Polynomial};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DfcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Syntax = 3,
    UnknownIdentifier = 4,
    NonIntegerExponent = 5,
    Domain = 6,
    Overflow = 7,
    DimensionCap = 8,
    GainSum = 9,
    NotAnOrbit = 10,
    ZeroPolynomial = 11,
    NoBoundaryCrossing = 12,
    BufferTooSmall = 13,
    InvalidUtf8 = 14,
    Panic = 15,
}

/// Named gain schemes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DfcScheme {
    Uniform = 0,
    Dk2013 = 1,
}

impl From<DfcScheme> for GainScheme {
    fn from(s: DfcScheme) -> Self {
        match s {
            DfcScheme::Uniform => GainScheme::Uniform,
            DfcScheme::Dk2013 => GainScheme::Dk2013,
        }
    }
}

/// A scalar map.
pub struct DfcMap(MapSpec);
/// A gain vector summing to one.
pub struct DfcGains(GainVector);
/// A real polynomial.
pub struct DfcPolynomial(Polynomial);
/// The cycles of one period found on a map's domain.
pub struct DfcCycleList(Vec<Cycle>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DfcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Syntax { .. } => DfcStatus::Syntax,
            Error::UnknownIdentifier { .. } => DfcStatus::UnknownIdentifier,
            Error::NonIntegerExponent { .. } => DfcStatus::NonIntegerExponent,
            Error::Domain(_) => DfcStatus::Domain,
            Error::Overflow { .. } => DfcStatus::Overflow,
            Error::InvalidArgument(_) => DfcStatus::InvalidArgument,
            Error::DimensionCap { .. } => DfcStatus::DimensionCap,
            Error::GainSum { .. } => DfcStatus::GainSum,
            Error::NotAnOrbit { .. } => DfcStatus::NotAnOrbit,
            Error::ZeroPolynomial => DfcStatus::ZeroPolynomial,
            Error::NoBoundaryCrossing => DfcStatus::NoBoundaryCrossing,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: DfcStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DfcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DfcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            DfcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(DfcStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(DfcStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(DfcStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(DfcStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            DfcStatus::InvalidUtf8,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

/// Copies `src` into `(dst, cap)` and stores `src.len()` in `len_out`.
unsafe fn copy_out(
    src: &[f64],
    dst: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> Result<(), Failure> {
    if let Some(l) = len_out.as_mut() {
        *l = src.len();
    }
    if cap < src.len() {
        return Err(fail(
            DfcStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err(fail(DfcStatus::NullPointer, "output buffer is null"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dfc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dfc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a designator (`logistic:r=4`) or expression with `n_params`
/// bindings `names[i] = values[i]`.
///
/// # Safety
/// `source` and each `names[i]` must be NUL-terminated strings; `names` and
/// `values` must hold `n_params` entries; `out_map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_map_parse(
    source: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    n_params: usize,
    out_map: *mut *mut DfcMap,
) -> DfcStatus {
    guard(|| {
        let out_map = out(out_map, "out_map")?;
        let source = text(source, "source")?;
        let names = slice(names, n_params, "names")?;
        let values = slice(values, n_params, "values")?;
        let mut params = std::collections::BTreeMap::new();
        for (&name, &value) in names.iter().zip(values) {
            params.insert(text(name, "names[i]")?.to_string(), value);
        }
        *out_map = boxed(DfcMap(MapSpec::parse(source, &params)?));
        Ok(())
    })
}

/// Replaces the search interval used for cycle detection.
///
/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfc_map_set_domain(map: *mut DfcMap, lo: f64, hi: f64) -> DfcStatus {
    guard(|| {
        let map = out(map, "map")?;
        map.0 = map.0.clone().with_domain(lo, hi)?;
        Ok(())
    })
}

/// `f(x)` and, when `out_deriv` is non-null, `f′(x)`.
///
/// # Safety
/// `map` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_map_eval(
    map: *const DfcMap,
    x: f64,
    out_value: *mut f64,
    out_deriv: *mut f64,
) -> DfcStatus {
    guard(|| {
        let map = deref(map, "map")?;
        let value = out(out_value, "out_value")?;
        let d = map.0.eval_dual(x)?;
        *value = d.value;
        if let Some(deriv) = out_deriv.as_mut() {
            *deriv = d.deriv;
        }
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dfc_map_free(map: *mut DfcMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Gain vector from explicit values, which must sum to one.
///
/// # Safety
/// `values` must hold `len` entries; `out_gains` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_gains_new(
    values: *const f64,
    len: usize,
    out_gains: *mut *mut DfcGains,
) -> DfcStatus {
    guard(|| {
        let out_gains = out(out_gains, "out_gains")?;
        let values = slice(values, len, "values")?;
        *out_gains = boxed(DfcGains(GainVector::new(values.to_vec())?));
        Ok(())
    })
}

/// Gain vector of a named scheme with `n` entries.
///
/// # Safety
/// `out_gains` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_gains_scheme(
    scheme: DfcScheme,
    n: usize,
    out_gains: *mut *mut DfcGains,
) -> DfcStatus {
    guard(|| {
        let out_gains = out(out_gains, "out_gains")?;
        *out_gains = boxed(DfcGains(GainScheme::from(scheme).gains(n)?));
        Ok(())
    })
}

/// Copies the gains into `buf`.
///
/// # Safety
/// `gains` must be a live handle; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn dfc_gains_values(
    gains: *const DfcGains,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DfcStatus {
    guard(|| {
        let gains = deref(gains, "gains")?;
        copy_out(gains.0.as_slice(), buf, cap, out_len)
    })
}

/// # Safety
/// `gains` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dfc_gains_free(gains: *mut DfcGains) {
    if !gains.is_null() {
        drop(Box::from_raw(gains));
    }
}

/// Polynomial from ascending coefficients.
///
/// # Safety
/// `coeffs` must hold `len` values; `out_poly` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_new(
    coeffs: *const f64,
    len: usize,
    out_poly: *mut *mut DfcPolynomial,
) -> DfcStatus {
    guard(|| {
        let out_poly = out(out_poly, "out_poly")?;
        let coeffs = slice(coeffs, len, "coeffs")?;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(fail(
                DfcStatus::InvalidArgument,
                "coefficients must be finite and non-empty",
            ));
        }
        *out_poly = boxed(DfcPolynomial(Polynomial::new(coeffs.to_vec())));
        Ok(())
    })
}

/// `λ^{(N−1)T+1} − μ·q(λ)^T` for the given gains, `N = len(gains)`.
///
/// # Safety
/// `gains` must be a live handle; `out_poly` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_char_poly_closed(
    t: usize,
    gains: *const DfcGains,
    mu: f64,
    out_poly: *mut *mut DfcPolynomial,
) -> DfcStatus {
    guard(|| {
        let out_poly = out(out_poly, "out_poly")?;
        let a = &deref(gains, "gains")?.0;
        *out_poly = boxed(DfcPolynomial(char_poly_closed(a.len(), t, a, mu)?));
        Ok(())
    })
}

/// # Safety
/// `poly` must be a live handle; `out_degree` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_degree(
    poly: *const DfcPolynomial,
    out_degree: *mut usize,
) -> DfcStatus {
    guard(|| {
        *out(out_degree, "out_degree")? = deref(poly, "poly")?.0.degree();
        Ok(())
    })
}

/// Ascending coefficients.
///
/// # Safety
/// `poly` must be a live handle; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_coeffs(
    poly: *const DfcPolynomial,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DfcStatus {
    guard(|| copy_out(deref(poly, "poly")?.0.coeffs(), buf, cap, out_len))
}

/// All roots, sorted by real then imaginary part.
///
/// # Safety
/// `poly` must be a live handle; `re` and `im` must each hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_roots(
    poly: *const DfcPolynomial,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DfcStatus {
    guard(|| {
        let set = poly_roots(&deref(poly, "poly")?.0)?;
        let res: Vec<f64> = set.roots.iter().map(|z| z.re).collect();
        let ims: Vec<f64> = set.roots.iter().map(|z| z.im).collect();
        copy_out(&res, re, cap, out_len)?;
        copy_out(&ims, im, cap, ptr::null_mut())
    })
}

/// # Safety
/// `poly` must be a live handle; `out_radius` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_spectral_radius(
    poly: *const DfcPolynomial,
    out_radius: *mut f64,
) -> DfcStatus {
    guard(|| {
        *out(out_radius, "out_radius")? = spectral_radius(&deref(poly, "poly")?.0)?;
        Ok(())
    })
}

/// Jury table verdict: all roots strictly inside the unit disc.
///
/// # Safety
/// `poly` must be a live handle; `out_stable` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_jury_stable(
    poly: *const DfcPolynomial,
    out_stable: *mut bool,
) -> DfcStatus {
    guard(|| {
        *out(out_stable, "out_stable")? = jury_stable(&deref(poly, "poly")?.0)?;
        Ok(())
    })
}

/// Repeated-root test on the Sylvester matrix of `p` and `p′`.
///
/// # Safety
/// `poly` must be a live handle; `out_repeated` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_has_repeated_roots(
    poly: *const DfcPolynomial,
    tol: f64,
    out_repeated: *mut bool,
) -> DfcStatus {
    guard(|| {
        *out(out_repeated, "out_repeated")? = has_repeated_roots(&deref(poly, "poly")?.0, tol)?;
        Ok(())
    })
}

/// # Safety
/// `poly` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dfc_polynomial_free(poly: *mut DfcPolynomial) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Row-major Jacobian of the controlled cycle; `out_dim` receives the side
/// length `(N−1)T+1` and `buf` must hold its square.
///
/// # Safety
/// `gains` must be a live handle; `multipliers` must hold `t` values; `buf`
/// must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn dfc_build_jacobian(
    t: usize,
    gains: *const DfcGains,
    multipliers: *const f64,
    buf: *mut f64,
    cap: usize,
    out_dim: *mut usize,
) -> DfcStatus {
    guard(|| {
        let a = &deref(gains, "gains")?.0;
        let mus = slice(multipliers, t, "multipliers")?;
        let j = build_jacobian(a.len(), t, a, mus)?;
        if let Some(d) = out_dim.as_mut() {
            *d = j.rows();
        }
        copy_out(j.as_slice(), buf, cap, ptr::null_mut())
    })
}

/// Stable multiplier interval around zero; `out_lo` is `-INFINITY` when
/// unbounded below.
///
/// # Safety
/// `gains` must be a live handle; `out_lo` and `out_hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_stable_mu_interval(
    t: usize,
    gains: *const DfcGains,
    out_lo: *mut f64,
    out_hi: *mut f64,
) -> DfcStatus {
    guard(|| {
        let a = &deref(gains, "gains")?.0;
        let lo = out(out_lo, "out_lo")?;
        let hi = out(out_hi, "out_hi")?;
        let interval = stable_mu_interval(a.len(), t, a)?;
        *lo = interval.lo;
        *hi = interval.hi;
        Ok(())
    })
}

/// Smallest stabilising `N ≤ n_max`, or 0 when there is none.
///
/// # Safety
/// `out_n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_min_n_to_stabilize(
    t: usize,
    mu: f64,
    scheme: DfcScheme,
    n_max: usize,
    out_n: *mut usize,
) -> DfcStatus {
    guard(|| {
        let n = out(out_n, "out_n")?;
        *n = min_n_to_stabilize(t, mu, scheme.into(), n_max)?.unwrap_or(0);
        Ok(())
    })
}

/// Cycles of minimal period `t` on the map's domain.
///
/// # Safety
/// `map` must be a live handle; `out_list` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_find_cycles(
    map: *const DfcMap,
    t: usize,
    grid_points: usize,
    out_list: *mut *mut DfcCycleList,
) -> DfcStatus {
    guard(|| {
        let out_list = out(out_list, "out_list")?;
        let cycles = find_cycles(&deref(map, "map")?.0, t, grid_points)?;
        *out_list = boxed(DfcCycleList(cycles));
        Ok(())
    })
}

/// Number of cycles in the list (0 for a null handle).
///
/// # Safety
/// `list` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfc_cycle_list_len(list: *const DfcCycleList) -> usize {
    list.as_ref().map_or(0, |l| l.0.len())
}

unsafe fn cycle_at<'a>(list: *const DfcCycleList, index: usize) -> Result<&'a Cycle, Failure> {
    let list = deref(list, "list")?;
    list.0.get(index).ok_or_else(|| {
        fail(
            DfcStatus::InvalidArgument,
            format!("cycle index {index} out of range (len {})", list.0.len()),
        )
    })
}

/// Orbit points of cycle `index`, starting at its smallest point.
///
/// # Safety
/// `list` must be a live handle; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn dfc_cycle_points(
    list: *const DfcCycleList,
    index: usize,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DfcStatus {
    guard(|| copy_out(&cycle_at(list, index)?.points, buf, cap, out_len))
}

/// Multipliers `f′(x_j)` of cycle `index`.
///
/// # Safety
/// `list` must be a live handle; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn dfc_cycle_multipliers(
    list: *const DfcCycleList,
    index: usize,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DfcStatus {
    guard(|| copy_out(&cycle_at(list, index)?.multipliers, buf, cap, out_len))
}

/// Product of the multipliers of cycle `index`.
///
/// # Safety
/// `list` must be a live handle; `out_mu` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_cycle_product(
    list: *const DfcCycleList,
    index: usize,
    out_mu: *mut f64,
) -> DfcStatus {
    guard(|| {
        *out(out_mu, "out_mu")? = cycle_at(list, index)?.multiplier_product;
        Ok(())
    })
}

/// # Safety
/// `list` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dfc_cycle_list_free(list: *mut DfcCycleList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Runs the controlled map towards cycle `index` of `cycles` and reports
/// convergence, the settle step (`-1` if none) and the final state.
///
/// # Safety
/// Handles must be live; `history` must hold `history_len` values; output
/// pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_simulate(
    map: *const DfcMap,
    gains: *const DfcGains,
    t: usize,
    history: *const f64,
    history_len: usize,
    steps: usize,
    cycles: *const DfcCycleList,
    index: usize,
    tol: f64,
    out_converged: *mut bool,
    out_settle_step: *mut i64,
    out_final: *mut f64,
) -> DfcStatus {
    guard(|| {
        let m = &deref(map, "map")?.0;
        let a = &deref(gains, "gains")?.0;
        let history = slice(history, history_len, "history")?;
        let target = cycle_at(cycles, index)?;
        let converged = out(out_converged, "out_converged")?;
        let settle = out(out_settle_step, "out_settle_step")?;
        let fin = out(out_final, "out_final")?;
        let tr = simulate(m, a, t, history, steps, target, tol)?;
        *converged = tr.converged;
        *settle = tr.settle_step.map_or(-1, |s| s as i64);
        *fin = tr.final_state();
        Ok(())
    })
}
