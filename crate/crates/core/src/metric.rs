//! Metric functions of the Weyl–Lewis–Papapetrou line element
//! `ds² = −e^{2U}(dt + A dφ)² + e^{−2U}[e^{2k}(dρ² + dζ²) + ρ²dφ²]`
//! with `e^{2U} = Re ℰ`.

use serde::Serialize;

use crate::ernst::{ErnstPoint, ErnstSolution};
use crate::error::{Error, Result};
use crate::theta::{Characteristics, ThetaContext};
use crate::C64;

/// Integration constants of `A` and `e^{2k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConstants {
    pub a0: f64,
    pub k: f64,
}

impl Default for MetricConstants {
    fn default() -> Self {
        MetricConstants { a0: 0.0, k: 1.0 }
    }
}

/// Regularity of a sample point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mask {
    Regular = 0,
    DivisorHit = 1,
    EvaluationError = 2,
}

impl Mask {
    pub fn from_error(e: &Error) -> Mask {
        match e {
            Error::ThetaDivisorHit(_) | Error::SingularRegion(_) => Mask::DivisorHit,
            _ => Mask::EvaluationError,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricValues {
    pub e2u: f64,
    pub a: f64,
    /// Imaginary part of the computed `A`; zero for real solutions.
    pub a_imag: f64,
    pub k: f64,
    /// `arg e^{2k}`. Constant across a solution's regular region when the
    /// real constant `K` differs from the physical one by a phase; jumps by
    /// `π` across zeros of the theta factors.
    pub k_phase: f64,
    pub mask: Mask,
}

impl MetricValues {
    pub fn masked(mask: Mask) -> Self {
        MetricValues {
            e2u: f64::NAN,
            a: f64::NAN,
            a_imag: f64::NAN,
            k: f64::NAN,
            k_phase: f64::NAN,
            mask,
        }
    }
}

/// Non-zero coefficients of the line element in `(t, φ, ρ, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineElement {
    pub g_tt: f64,
    pub g_tphi: f64,
    pub g_phiphi: f64,
    pub g_rhorho: f64,
    pub g_zetazeta: f64,
}

fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn guard(theta: &ThetaContext, z: &[C64], ch: &Characteristics) -> Result<C64> {
    let t = theta.theta(z, ch);
    let rel = t.norm() / theta.magnitude(z, ch);
    if rel < crate::ernst::DIVISOR_GUARD {
        return Err(Error::ThetaDivisorHit(rel));
    }
    Ok(t)
}

/// `Θ_pq(u⁻)Θ_pq(v⁻)`, the common denominator of the `A` formulas.
fn a_denominator(pt: &ErnstPoint) -> Result<C64> {
    let th = pt.kernels().theta();
    let ch = pt.characteristics();
    Ok(guard(th, pt.u_minus(), ch)? * guard(th, pt.v_minus(), ch)?)
}

/// `Z = (A − A₀)e^{2U} = −ρ[Θ_pq(0)Θ_pq(u⁻+v⁻)/(Q Θ_pq(u⁻)Θ_pq(v⁻)) − 1]`.
pub fn z_aux(pt: &ErnstPoint) -> Result<C64> {
    let den = a_denominator(pt)?;
    let g = pt.kernels().genus();
    let t0 = pt.theta_pq(&vec![C64::new(0.0, 0.0); g]);
    let ts = pt.theta_pq(&add(pt.u_minus(), pt.v_minus()));
    Ok(-pt.rho() * (t0 * ts / (pt.q()? * den) - 1.0))
}

/// `Z + ρ` in product form, `(ρ/Q)Θ_pq(2u⁻)Θ_pq(∫_ξ^ξ̄)/(Θ_pq(u⁻)Θ_pq(v⁻))`.
pub fn z_plus_rho(pt: &ErnstPoint) -> Result<C64> {
    let den = a_denominator(pt)?;
    let u2: Vec<C64> = pt.u_minus().iter().map(|x| 2.0 * x).collect();
    Ok(pt.rho() / pt.q()? * pt.theta_pq(&u2) * pt.theta_pq(pt.w()) / den)
}

/// `A` as a complex number (real for real solutions).
pub fn metric_a_complex(pt: &ErnstPoint, a0: f64) -> Result<C64> {
    let e = pt.value()?.e;
    Ok(a0 + z_aux(pt)? / e.re)
}

pub fn metric_a(pt: &ErnstPoint, a0: f64) -> Result<f64> {
    Ok(metric_a_complex(pt, a0)?.re)
}

/// `e^{2k} = K Θ_pq(0)Θ_pq(∫_ξ^ξ̄)/(Θ(0)Θ(∫_ξ^ξ̄))`.
pub fn e2k(pt: &ErnstPoint, k: f64) -> Result<C64> {
    let th = pt.kernels().theta();
    let g = pt.kernels().genus();
    let zero = Characteristics::zero(g);
    let origin = vec![C64::new(0.0, 0.0); g];
    let den = guard(th, &origin, &zero)? * guard(th, pt.w(), &zero)?;
    let num = guard(th, &origin, pt.characteristics())? * pt.theta_pq(pt.w());
    Ok(k * num / den)
}

/// `k = ½ ln|e^{2k}|`; the phase is reported by [`MetricValues::k_phase`].
pub fn metric_k(pt: &ErnstPoint, k: f64) -> Result<f64> {
    Ok(0.5 * e2k(pt, k)?.norm().ln())
}

/// Right side of `A_ξ = 2ρ(ℰ − ℰ̄)_ξ/(ℰ + ℰ̄)²` at a physical point.
pub fn a_xi(pt: &ErnstPoint) -> Result<C64> {
    let e = pt.value()?.e;
    let s = e + e.conj();
    let d = pt.d_xi()? - pt.d_xibar()?.conj();
    Ok(2.0 * pt.rho() * d / (s * s))
}

/// Right side of `k_ξ = (ξ − ξ̄)ℰ_ξℰ̄_ξ/(ℰ + ℰ̄)²` at a physical point.
pub fn k_xi(pt: &ErnstPoint) -> Result<C64> {
    let e = pt.value()?.e;
    let s = e + e.conj();
    Ok((pt.xi() - pt.xibar()) * pt.d_xi()? * pt.d_xibar()?.conj() / (s * s))
}

/// Right side of `Z_ξ̄ = ((Z+ρ)ℰ̄_ξ̄ + (Z−ρ)ℰ_ξ̄)/(ℰ + ℰ̄)` at a physical point.
pub fn z_xibar(pt: &ErnstPoint) -> Result<C64> {
    let e = pt.value()?.e;
    let z = z_aux(pt)?;
    let rho = pt.rho();
    let eb = pt.d_xibar()?;
    let ebar_b = pt.d_xi()?.conj();
    Ok(((z + rho) * ebar_b + (z - rho) * eb) / (e + e.conj()))
}

/// Normalized residual of
/// `D²ln[Θ(V)Θ(w+V)/(Θ(0)Θ(w))] + (D lnΘ(V) − D lnΘ(w+V))² = 0`,
/// `D = D_ξ`, `w = ∫_ξ^ξ̄`, zero characteristics.
pub fn f2_residual(pt: &ErnstPoint, v: &[C64]) -> Result<f64> {
    let kc = pt.kernels();
    let th = kc.theta();
    let zero = Characteristics::zero(kc.genus());
    let dir = kc.direction(&pt.xi_point());
    let origin = vec![C64::new(0.0, 0.0); kc.genus()];
    let wv = add(pt.w(), v);
    let parts = |z: &[C64]| -> Result<(C64, C64)> {
        let t = guard(th, z, &zero)?;
        let d1 = th.dir_deriv(z, &zero, &dir) / t;
        let d2 = th.dir_deriv2(z, &zero, &dir, &dir) / t;
        Ok((d1, d2 - d1 * d1))
    };
    let (av, bv) = parts(v)?;
    let (aw, bw) = parts(&wv)?;
    let (_, b0) = parts(&origin)?;
    let (_, bww) = parts(pt.w())?;
    let diff = av - aw;
    let terms = [bv, bw, -b0, -bww, diff * diff];
    let sum: C64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Ok(if scale == 0.0 { 0.0 } else { sum.norm() / scale })
}

/// All metric functions at a physical point; errors become a mask.
pub fn metric_values(sol: &ErnstSolution, xi: C64, c: MetricConstants) -> MetricValues {
    let run = || -> Result<MetricValues> {
        let pt = sol.at(xi)?;
        let e = pt.value()?.e;
        let a = metric_a_complex(&pt, c.a0)?;
        let ek = e2k(&pt, c.k)?;
        Ok(MetricValues {
            e2u: e.re,
            a: a.re,
            a_imag: a.im,
            k: 0.5 * ek.norm().ln(),
            k_phase: ek.arg(),
            mask: Mask::Regular,
        })
    };
    run().unwrap_or_else(|e| MetricValues::masked(Mask::from_error(&e)))
}

pub fn line_element(v: &MetricValues, rho: f64) -> LineElement {
    let e2u = v.e2u;
    LineElement {
        g_tt: -e2u,
        g_tphi: -e2u * v.a,
        g_phiphi: -e2u * v.a * v.a + rho * rho / e2u,
        g_rhorho: (2.0 * v.k).exp() / e2u,
        g_zetazeta: (2.0 * v.k).exp() / e2u,
    }
}
