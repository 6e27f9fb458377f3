//! C ABI for `ernst-theta`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every call returns an [`EtStatus`];
//! results are written through out-pointers. After a failure the message
//! is available from [`et_last_error`] on the same thread.
//!
//! Complex arrays are passed as interleaved `(re, im)` pairs of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use ernst_theta::metric::{self, Mask, MetricConstants};
use ernst_theta::verify::{self, SuiteConfig};
use ernst_theta::{Characteristics, ErnstSolution, Error, HyperellipticCurve, PeriodData, PeriodOptions, ThetaContext};
use num_complex::Complex64 as C64;

/// Status codes. `ET_STATUS_OK` is zero; every other value identifies the failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ConfigParse = 3,
    DuplicateBranchPoint = 4,
    OddBranchCount = 5,
    RealityViolation = 6,
    OnAxis = 7,
    BranchCollision = 8,
    CutsIntersect = 9,
    IllConditioned = 10,
    NoConvergence = 11,
    PathThroughBranchPoint = 12,
    CoincidingPoints = 13,
    PoleOnCycle = 14,
    DivergentContext = 15,
    NoNonSingularOddChar = 16,
    SingularPrimeForm = 17,
    ThetaDivisorHit = 18,
    SingularRegion = 19,
    Panic = 20,
}

impl From<&Error> for EtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DuplicateBranchPoint(..) => EtStatus::DuplicateBranchPoint,
            Error::OddBranchCount(_) => EtStatus::OddBranchCount,
            Error::RealityViolation(_) => EtStatus::RealityViolation,
            Error::OnAxis(_) => EtStatus::OnAxis,
            Error::BranchCollision(_) => EtStatus::BranchCollision,
            Error::CutsIntersect(..) => EtStatus::CutsIntersect,
            Error::IllConditioned(_) => EtStatus::IllConditioned,
            Error::NoConvergence(_) => EtStatus::NoConvergence,
            Error::PathThroughBranchPoint(_) => EtStatus::PathThroughBranchPoint,
            Error::CoincidingPoles | Error::CoincidingPoints => EtStatus::CoincidingPoints,
            Error::PoleOnCycle => EtStatus::PoleOnCycle,
            Error::DivergentContext(_) => EtStatus::DivergentContext,
            Error::NoNonSingularOddChar => EtStatus::NoNonSingularOddChar,
            Error::SingularPrimeForm(_) => EtStatus::SingularPrimeForm,
            Error::ThetaDivisorHit(_) => EtStatus::ThetaDivisorHit,
            Error::SingularRegion(_) => EtStatus::SingularRegion,
            Error::ConfigParse(_) => EtStatus::ConfigParse,
            Error::InvalidInput(_) => EtStatus::InvalidInput,
        }
    }
}

/// Metric functions at one point. `mask` is 0 for a regular point, 1 for
/// a theta-divisor hit and 2 for any other evaluation error; the other
/// fields are NaN when `mask` is nonzero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EtMetric {
    pub e2u: f64,
    pub a: f64,
    pub k: f64,
    pub mask: u32,
}

/// Period data of a hyperelliptic curve.
pub struct EtCurve {
    periods: PeriodData,
}

/// Theta function for a fixed period matrix.
pub struct EtTheta {
    ctx: ThetaContext,
}

/// A theta-functional Ernst potential.
pub struct EtSolution {
    sol: ErnstSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EtStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            EtStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            EtStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EtStatus::Panic
        }
    }
}

unsafe fn complex_slice(p: *const f64, n: usize) -> Result<Vec<C64>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Fail::Null);
    }
    let raw = slice::from_raw_parts(p, 2 * n);
    Ok(raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

/// The caller provides room for `v.len()` complex values at `dst`.
unsafe fn write_complex(dst: *mut f64, v: &[C64]) -> Result<(), Fail> {
    if dst.is_null() {
        return Err(Fail::Null);
    }
    for (i, z) in v.iter().enumerate() {
        *dst.add(2 * i) = z.re;
        *dst.add(2 * i + 1) = z.im;
    }
    Ok(())
}

/// Copies the message of the last failure on this thread into `buf`
/// (NUL-terminated, truncated to `len`). Returns the full message length
/// in bytes, or 0 when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn et_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Builds a curve from `n` branch points and computes its period data.
///
/// # Safety
/// `branch` holds `2n` doubles; `out_curve` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_curve_new(branch: *const f64, n: usize, out_curve: *mut *mut EtCurve) -> EtStatus {
    guard(|| {
        let pts = complex_slice(branch, n)?;
        let dst = out(out_curve)?;
        let curve = HyperellipticCurve::from_branch_points(&pts)?;
        let periods = PeriodData::compute(&curve, &PeriodOptions::default())?;
        *dst = Box::into_raw(Box::new(EtCurve { periods }));
        Ok(())
    })
}

/// # Safety
/// `curve` is null or a handle from [`et_curve_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn et_curve_free(curve: *mut EtCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// # Safety
/// `curve` is a live handle; `genus` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_curve_genus(curve: *const EtCurve, genus: *mut usize) -> EtStatus {
    guard(|| {
        *out(genus)? = handle(curve)?.periods.genus();
        Ok(())
    })
}

/// Writes the normalized period matrix, row-major, as `g²` complex values.
///
/// # Safety
/// `curve` is a live handle; `b` has room for `2g²` doubles.
#[no_mangle]
pub unsafe extern "C" fn et_curve_period_matrix(curve: *const EtCurve, b: *mut f64) -> EtStatus {
    guard(|| {
        let m = handle(curve)?.periods.b();
        let g = m.nrows();
        let vals: Vec<C64> = (0..g).flat_map(|i| (0..g).map(move |j| m[(i, j)])).collect();
        write_complex(b, &vals)
    })
}

/// Theta context for a `g×g` row-major period matrix.
///
/// # Safety
/// `b` holds `2g²` doubles; `out_theta` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_theta_new(b: *const f64, g: usize, tol: f64, out_theta: *mut *mut EtTheta) -> EtStatus {
    guard(|| {
        if g == 0 {
            return Err(Error::InvalidInput("genus must be at least 1".into()).into());
        }
        let vals = complex_slice(b, g * g)?;
        let dst = out(out_theta)?;
        let m = ernst_theta::linalg::CMat::from_row_slice(g, g, &vals);
        let ctx = ThetaContext::new(&m, tol)?;
        *dst = Box::into_raw(Box::new(EtTheta { ctx }));
        Ok(())
    })
}

/// # Safety
/// `theta` is null or a handle from [`et_theta_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn et_theta_free(theta: *mut EtTheta) {
    if !theta.is_null() {
        drop(Box::from_raw(theta));
    }
}

/// `Θ[p,q](z)`. `p` and `q` may be null for zero characteristics.
///
/// # Safety
/// `z`, and `p`, `q` when non-null, hold `2g` doubles; `value` has room for 2.
#[no_mangle]
pub unsafe extern "C" fn et_theta_eval(theta: *const EtTheta, z: *const f64, p: *const f64, q: *const f64, value: *mut f64) -> EtStatus {
    guard(|| {
        let t = &handle(theta)?.ctx;
        let g = t.genus();
        let z = complex_slice(z, g)?;
        let zero = vec![C64::new(0.0, 0.0); g];
        let p = if p.is_null() { zero.clone() } else { complex_slice(p, g)? };
        let q = if q.is_null() { zero } else { complex_slice(q, g)? };
        write_complex(value, &[t.theta(&z, &Characteristics { p, q })])
    })
}

/// Ernst potential for `g` branch-point pairs `(E_m, F_m)` given as `4g`
/// doubles `E_re, E_im, F_re, F_im`, with characteristics `p`, `q`
/// (`2g` doubles each; null for zero).
///
/// # Safety
/// Pointer arguments hold the stated number of doubles; `out_sol` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_solution_new(
    pairs: *const f64,
    g: usize,
    p: *const f64,
    q: *const f64,
    out_sol: *mut *mut EtSolution,
) -> EtStatus {
    guard(|| {
        if g == 0 {
            return Err(Error::InvalidInput("genus must be at least 1".into()).into());
        }
        let ends = complex_slice(pairs, 2 * g)?;
        let dst = out(out_sol)?;
        let pairs: Vec<(C64, C64)> = ends.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let zero = vec![C64::new(0.0, 0.0); g];
        let p = if p.is_null() { zero.clone() } else { complex_slice(p, g)? };
        let q = if q.is_null() { zero } else { complex_slice(q, g)? };
        let sol = ErnstSolution::new(&pairs, Characteristics { p, q })?.with_options(PeriodOptions::default(), 1e-14);
        *dst = Box::into_raw(Box::new(EtSolution { sol }));
        Ok(())
    })
}

/// # Safety
/// `sol` is null or a handle from [`et_solution_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn et_solution_free(sol: *mut EtSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// `ℰ(ρ, ζ)`.
///
/// # Safety
/// `sol` is a live handle; `value` has room for 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn et_solution_eval(sol: *const EtSolution, rho: f64, zeta: f64, value: *mut f64) -> EtStatus {
    guard(|| {
        let e = handle(sol)?.sol.evaluate(C64::new(zeta, -rho))?.e;
        write_complex(value, &[e])
    })
}

/// Normalized residual of the Ernst equation at `(ρ, ζ)`.
///
/// # Safety
/// `sol` is a live handle; `residual` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_solution_residual(sol: *const EtSolution, rho: f64, zeta: f64, residual: *mut f64) -> EtStatus {
    guard(|| {
        let r = handle(sol)?.sol.ernst_residual(C64::new(zeta, -rho))?;
        *out(residual)? = r;
        Ok(())
    })
}

/// Metric functions at `(ρ, ζ)` with integration constants `A₀`, `K`.
/// Evaluation failures are reported through `mask`, not the status.
///
/// # Safety
/// `sol` is a live handle; `out_metric` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_solution_metric(
    sol: *const EtSolution,
    rho: f64,
    zeta: f64,
    a0: f64,
    k: f64,
    out_metric: *mut EtMetric,
) -> EtStatus {
    guard(|| {
        let s = &handle(sol)?.sol;
        let dst = out(out_metric)?;
        if !(rho > 0.0) {
            return Err(Error::OnAxis(rho).into());
        }
        let v = metric::metric_values(s, C64::new(zeta, -rho), MetricConstants { a0, k });
        *dst = if v.mask == Mask::Regular {
            EtMetric {
                e2u: v.e2u,
                a: v.a,
                k: v.k,
                mask: 0,
            }
        } else {
            EtMetric {
                e2u: f64::NAN,
                a: f64::NAN,
                k: f64::NAN,
                mask: v.mask as u32,
            }
        };
        Ok(())
    })
}

/// Runs the seeded identity suite and reports the number of passing and
/// failing checks.
///
/// # Safety
/// `passed` and `failed` are writable.
#[no_mangle]
pub unsafe extern "C" fn et_run_checks(seed: u64, genus: usize, passed: *mut usize, failed: *mut usize) -> EtStatus {
    guard(|| {
        let (dp, df) = (out(passed)?, out(failed)?);
        if genus == 0 {
            return Err(Error::InvalidInput("genus must be at least 1".into()).into());
        }
        let reports = verify::run_suite(&SuiteConfig {
            seed,
            genus,
            ..Default::default()
        });
        *dp = reports.iter().filter(|r| r.pass).count();
        *df = reports.len() - *dp;
        Ok(())
    })
}
