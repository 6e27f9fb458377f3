//! Theta-functional Ernst potentials
//! `ℰ = Θ_pq(∫_ξ^{∞⁺}) / Θ_pq(∫_ξ^{∞⁻})`
//! on the family of curves `μ² = (λ−ξ)(λ−ξ̄)Π(λ−E_m)(λ−F_m)`, `ξ = ζ − iρ`.
//!
//! [`ErnstPoint`] holds everything that depends on `ξ`: the curve, its
//! kernel context and the distinguished Abel integrals. It is built either
//! at a physical point (`ξ̄ = conj ξ`) or, for holomorphic finite
//! differences, with `ξ` and `ξ̄` moved independently.

use serde::Serialize;

use crate::curve::{Cut, ErnstCurve, HyperellipticCurve, SurfacePoint};
use crate::error::{Error, Result};
use crate::kernels::KernelContext;
use crate::periods::{PeriodData, PeriodOptions};
use crate::theta::Characteristics;
use crate::C64;

/// `|Θ|` below this fraction of its natural size counts as a divisor hit.
pub const DIVISOR_GUARD: f64 = 1e-10;

/// Largest reality defect accepted at a physical point.
pub const REALITY_TOL: f64 = 1e-10;

/// Curve family, characteristics and numerical options.
#[derive(Debug, Clone)]
pub struct ErnstSolution {
    pairs: Vec<(C64, C64)>,
    ch: Characteristics,
    opts: PeriodOptions,
    tol: f64,
}

/// Value of the potential with its diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErnstValue {
    #[serde(serialize_with = "ser_c64")]
    pub e: C64,
    /// Largest reality defect, see [`ErnstPoint::reality_defects`].
    pub reality: f64,
    /// `|Θ_pq(0)|` relative to its natural size.
    pub theta_zero: f64,
    /// `|Θ_pq(∫_ξ^{∞⁻})|` relative to its natural size.
    pub theta_den: f64,
    /// `‖∫_ξ^{∞⁺} + ∫_ξ^{∞⁻}‖`.
    pub path_symmetry: f64,
}

fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl ErnstSolution {
    pub fn new(pairs: &[(C64, C64)], ch: Characteristics) -> Result<Self> {
        if ch.genus() != pairs.len() {
            return Err(Error::InvalidInput(format!(
                "characteristics of length {} for genus {}",
                ch.genus(),
                pairs.len()
            )));
        }
        Ok(ErnstSolution {
            pairs: pairs.to_vec(),
            ch,
            opts: PeriodOptions::default(),
            tol: 1e-12,
        })
    }

    /// Characteristics `p = 0`, `q = r + i·s` with `r = ¼·diag(N)` where
    /// `N = −2 Re B` is read at `probe`. `Re B` is the same half-integer
    /// matrix at every `ξ` of the family, so these pass the reality check
    /// everywhere.
    pub fn admissible(pairs: &[(C64, C64)], s: &[f64], probe: C64) -> Result<Self> {
        let g = pairs.len();
        if s.len() != g {
            return Err(Error::InvalidInput("characteristic length differs from genus".into()));
        }
        let curve = ErnstCurve::new(probe, pairs)?;
        let pd = PeriodData::compute(curve.curve(), &PeriodOptions::default())?;
        let b = pd.b();
        let q: Vec<C64> = (0..g)
            .map(|i| {
                let n = (-2.0 * b[(i, i)].re).round().rem_euclid(2.0);
                C64::new(0.25 * n, s[i])
            })
            .collect();
        Self::new(
            pairs,
            Characteristics {
                p: vec![C64::new(0.0, 0.0); g],
                q,
            },
        )
    }

    pub fn with_options(mut self, opts: PeriodOptions, tol: f64) -> Self {
        self.opts = opts;
        self.tol = tol;
        self
    }

    pub fn pairs(&self) -> &[(C64, C64)] {
        &self.pairs
    }

    pub fn characteristics(&self) -> &Characteristics {
        &self.ch
    }

    pub fn genus(&self) -> usize {
        self.pairs.len()
    }

    pub fn options(&self) -> &PeriodOptions {
        &self.opts
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Per-point data at `ξ`, with `ξ̄ = conj ξ`.
    pub fn at(&self, xi: C64) -> Result<ErnstPoint> {
        let curve = ErnstCurve::new(xi, &self.pairs)?;
        let pt = ErnstPoint::build(curve.curve().clone(), self)?;
        let defects = pt.reality_defects();
        let worst = defects
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if worst.1 > REALITY_TOL {
            return Err(Error::RealityViolation(worst.0));
        }
        Ok(pt)
    }

    /// Per-point data on the complexified family with `ξ` and `ξ̄` moved
    /// independently; no reality check.
    pub fn at_pair(&self, xi: C64, xibar: C64) -> Result<ErnstPoint> {
        let mut cuts = vec![Cut::new(xi, xibar)];
        cuts.extend(self.pairs.iter().map(|&(e, f)| Cut::new(e, f)));
        let curve = HyperellipticCurve::from_cuts(cuts, C64::new(0.0, -1.0))?;
        ErnstPoint::build(curve, self)
    }

    pub fn evaluate(&self, xi: C64) -> Result<ErnstValue> {
        self.at(xi)?.value()
    }

    pub fn d_xi(&self, xi: C64) -> Result<C64> {
        self.at(xi)?.d_xi()
    }

    pub fn d_xibar(&self, xi: C64) -> Result<C64> {
        self.at(xi)?.d_xibar()
    }

    pub fn laplace(&self, xi: C64) -> Result<C64> {
        self.at(xi)?.laplace()
    }

    pub fn ernst_residual(&self, xi: C64) -> Result<f64> {
        self.at(xi)?.ernst_residual()
    }
}

/// Everything the potential needs at one `ξ`.
#[derive(Debug, Clone)]
pub struct ErnstPoint {
    kc: KernelContext,
    ch: Characteristics,
    xi: C64,
    xibar: C64,
    u_plus: Vec<C64>,
    u_minus: Vec<C64>,
    w: Vec<C64>,
    v_minus: Vec<C64>,
}

impl ErnstPoint {
    fn build(curve: HyperellipticCurve, sol: &ErnstSolution) -> Result<Self> {
        let xi = curve.branch(0);
        let xibar = curve.branch(1);
        let kc = KernelContext::new(&curve, &sol.opts, sol.tol)?;
        let (x, y) = (kc.curve().branch_point(0), kc.curve().branch_point(1));
        let kc = kc.with_star_for(&[x, y, SurfacePoint::inf_plus(), SurfacePoint::inf_minus()])?;
        let u_plus = kc.integral(&x, &SurfacePoint::inf_plus())?;
        let u_minus = kc.integral(&x, &SurfacePoint::inf_minus())?;
        let w = kc.integral(&x, &y)?;
        let v_minus = kc.integral(&y, &SurfacePoint::inf_minus())?;
        Ok(ErnstPoint {
            kc,
            ch: sol.ch.clone(),
            xi,
            xibar,
            u_plus,
            u_minus,
            w,
            v_minus,
        })
    }

    /// Same point with its kernel context replaced.
    pub fn with_kernels(&self, kc: KernelContext) -> Self {
        ErnstPoint { kc, ..self.clone() }
    }

    pub fn kernels(&self) -> &KernelContext {
        &self.kc
    }

    pub fn characteristics(&self) -> &Characteristics {
        &self.ch
    }

    pub fn xi(&self) -> C64 {
        self.xi
    }

    pub fn xibar(&self) -> C64 {
        self.xibar
    }

    pub fn rho(&self) -> f64 {
        -self.xi.im
    }

    pub fn xi_point(&self) -> SurfacePoint {
        self.kc.curve().branch_point(0)
    }

    pub fn xibar_point(&self) -> SurfacePoint {
        self.kc.curve().branch_point(1)
    }

    /// `∫_ξ^{∞⁺}`.
    pub fn u_plus(&self) -> &[C64] {
        &self.u_plus
    }

    /// `∫_ξ^{∞⁻}`.
    pub fn u_minus(&self) -> &[C64] {
        &self.u_minus
    }

    /// `∫_ξ^{ξ̄}`.
    pub fn w(&self) -> &[C64] {
        &self.w
    }

    /// `∫_{ξ̄}^{∞⁻}`.
    pub fn v_minus(&self) -> &[C64] {
        &self.v_minus
    }

    /// `V = Bp + q`.
    pub fn v_shift(&self) -> Vec<C64> {
        self.ch.shift(self.kc.periods().b())
    }

    /// Per-component distance from the conditions under which `conj ℰ` is
    /// the potential with `ξ` and `ξ̄` exchanged: `Im p = 0`,
    /// `2⟨p, ∫_ξ^ξ̄⟩ ∈ ℤ` and `2 Re V − ½·diag(N) ∈ ℤ^g` with `N = −2 Re B`.
    /// The pairing condition is charged to component 0. Even half-integer
    /// characteristics give `ℰ ≡ 1` and have no defect.
    pub fn reality_defects(&self) -> Vec<f64> {
        if self.ch.parity() == Some(0) {
            return vec![0.0; self.kc.genus()];
        }
        let b = self.kc.periods().b();
        let v = self.v_shift();
        let frac = |x: f64| (x - x.round()).abs();
        let mut d: Vec<f64> = (0..self.kc.genus())
            .map(|i| {
                let n = -2.0 * b[(i, i)].re;
                self.ch.p[i].im.abs().max(frac(2.0 * v[i].re - 0.5 * n))
            })
            .collect();
        let pw: f64 = self.ch.p.iter().zip(&self.w).map(|(p, w)| p.re * w.re).sum();
        if let Some(d0) = d.first_mut() {
            *d0 = d0.max(frac(2.0 * pw));
        }
        d
    }

    pub fn reality(&self) -> f64 {
        self.reality_defects().into_iter().fold(0.0, f64::max)
    }

    pub fn theta_pq(&self, z: &[C64]) -> C64 {
        self.kc.theta().theta(z, &self.ch)
    }

    /// `Θ_pq(z)`, rejected when it is within the divisor guard of zero.
    fn guarded(&self, z: &[C64], err: fn(f64) -> Error) -> Result<C64> {
        let t = self.theta_pq(z);
        let rel = t.norm() / self.kc.theta().magnitude(z, &self.ch);
        if rel < DIVISOR_GUARD {
            return Err(err(rel));
        }
        Ok(t)
    }

    fn rel(&self, z: &[C64]) -> f64 {
        self.theta_pq(z).norm() / self.kc.theta().magnitude(z, &self.ch)
    }

    fn zero(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.kc.genus()]
    }

    fn neg(z: &[C64]) -> Vec<C64> {
        z.iter().map(|x| -x).collect()
    }

    fn dir(&self, z: &[C64], p: &SurfacePoint) -> C64 {
        self.kc.theta().dir_deriv(z, &self.ch, &self.kc.direction(p))
    }

    /// Both divisor guards.
    fn regular(&self) -> Result<(C64, C64)> {
        let t0 = self.guarded(&self.zero(), Error::SingularRegion)?;
        let td = self.guarded(&self.u_minus, Error::ThetaDivisorHit)?;
        Ok((t0, td))
    }

    pub fn value(&self) -> Result<ErnstValue> {
        let (_, td) = self.regular()?;
        let e = self.theta_pq(&self.u_plus) / td;
        let path_symmetry = self
            .u_plus
            .iter()
            .zip(&self.u_minus)
            .map(|(a, b)| (a + b).norm())
            .fold(0.0, f64::max);
        Ok(ErnstValue {
            e,
            reality: self.reality(),
            theta_zero: self.rel(&self.zero()),
            theta_den: self.rel(&self.u_minus),
            path_symmetry,
        })
    }

    /// `ℰ_ξ = ½ c2(∞⁻,ξ,∞⁺) Θ_pq(0) D_ξΘ_pq(0) / Θ_pq²(∫_ξ^{∞⁻})`.
    pub fn d_xi(&self) -> Result<C64> {
        let (t0, td) = self.regular()?;
        let (x, ip, im) = (self.xi_point(), SurfacePoint::inf_plus(), SurfacePoint::inf_minus());
        let c2 = self.kc.c2(&im, &x, &ip)?;
        Ok(0.5 * c2 * t0 * self.dir(&self.zero(), &x) / (td * td))
    }

    /// `ℰ_ξ̄ = ½ c2(∞⁻,ξ̄,∞⁺) Θ_pq(∫_ξ̄^ξ) D_ξ̄Θ_pq(∫_ξ^ξ̄) / Θ_pq²(∫_ξ^{∞⁻})`.
    pub fn d_xibar(&self) -> Result<C64> {
        let (_, td) = self.regular()?;
        let (y, ip, im) = (self.xibar_point(), SurfacePoint::inf_plus(), SurfacePoint::inf_minus());
        let c2 = self.kc.c2(&im, &y, &ip)?;
        let back = self.theta_pq(&Self::neg(&self.w));
        Ok(0.5 * c2 * back * self.dir(&self.w, &y) / (td * td))
    }

    /// Cylindrical Laplacian `Δℰ`,
    /// `2 c2(∞⁻,ξ,∞⁺) c2(ξ,ξ̄,∞⁺) Θ_pq(∫_ξ̄^{∞⁻}) D_ξ̄Θ_pq(∫_ξ^ξ̄) D_ξΘ_pq(0) / Θ_pq³(∫_ξ^{∞⁻})`.
    pub fn laplace(&self) -> Result<C64> {
        let (_, td) = self.regular()?;
        let (x, y) = (self.xi_point(), self.xibar_point());
        let (ip, im) = (SurfacePoint::inf_plus(), SurfacePoint::inf_minus());
        let c2a = self.kc.c2(&im, &x, &ip)?;
        let c2b = self.kc.c2(&x, &y, &ip)?;
        let num = self.theta_pq(&self.v_minus) * self.dir(&self.w, &y) * self.dir(&self.zero(), &x);
        Ok(2.0 * c2a * c2b * num / (td * td * td))
    }

    /// `ℰ_{ξξ̄}` recovered from the Laplacian.
    pub fn d_xi_xibar(&self) -> Result<C64> {
        let lap = self.laplace()?;
        Ok(0.25 * lap + (self.d_xibar()? - self.d_xi()?) / (2.0 * (self.xibar - self.xi)))
    }

    /// `Q` at this point (zero characteristics).
    pub fn q(&self) -> Result<C64> {
        self.kc.q(&self.xi_point(), &self.xibar_point())
    }

    /// Right side of the real-part identity,
    /// `2Q Θ_pq(0) Θ_pq(∫_ξ̄^ξ) / (Θ_pq(∫_ξ^{∞⁻}) Θ_pq(∫_ξ̄^{∞⁻}))`.
    pub fn real_part_formula(&self) -> Result<C64> {
        let (t0, td) = self.regular()?;
        let tv = self.guarded(&self.v_minus, Error::ThetaDivisorHit)?;
        Ok(2.0 * self.q()? * t0 * self.theta_pq(&Self::neg(&self.w)) / (td * tv))
    }

    /// Normalized residual of the Ernst equation in `(ξ, ξ̄)` form, with
    /// `ℰ̄ = conj ℰ` (physical points only).
    pub fn ernst_residual(&self) -> Result<f64> {
        let e = self.value()?.e;
        let s = e + e.conj();
        let ex = self.d_xi()?;
        let eb = self.d_xibar()?;
        let exb = self.d_xi_xibar()?;
        let damp = (eb - ex) / (2.0 * (self.xibar - self.xi));
        let lhs = s * (exb - damp);
        let rhs = 2.0 * ex * eb;
        let scale = lhs.norm().max(rhs.norm()).max((s * exb).norm()).max((s * damp).norm());
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok((lhs - rhs).norm() / scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pairs(g: usize) -> Vec<(C64, C64)> {
        [(c(-1.0, 2.0), c(-1.0, -2.0)), (c(1.5, 0.0), c(2.5, 0.0))][..g].to_vec()
    }

    fn solution(g: usize) -> ErnstSolution {
        let s = [0.2, -0.1];
        ErnstSolution::admissible(&pairs(g), &s[..g], c(0.3, -0.7)).unwrap()
    }

    const POINTS: [(f64, f64); 4] = [(0.7, 0.3), (1.3, -0.4), (0.4, 1.1), (2.1, 0.8)];

    fn xi(rho: f64, zeta: f64) -> C64 {
        c(zeta, -rho)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn flat_solution() {
        for g in [1, 2] {
            let sol = ErnstSolution::new(&pairs(g), Characteristics::zero(g)).unwrap();
            let pt = sol.at(xi(0.8, 0.2)).unwrap();
            assert!((pt.value().unwrap().e - 1.0).norm() < 1e-12);
            assert!(pt.d_xi().unwrap().norm() < 1e-12);
            assert!(pt.d_xibar().unwrap().norm() < 1e-12);
            assert!(pt.laplace().unwrap().norm() < 1e-12);
            assert!(pt.ernst_residual().unwrap() < 1e-12);
        }
    }

    #[test]
    fn admissible_characteristics_are_real() {
        let sol = solution(2);
        let ch = sol.characteristics();
        assert!(ch.p.iter().all(|p| p.norm() == 0.0));
        for &(r, z) in &POINTS {
            assert!(sol.at(xi(r, z)).unwrap().reality() < REALITY_TOL);
        }
    }

    #[test]
    fn non_real_characteristics_rejected() {
        let g = 1;
        let ch = Characteristics {
            p: vec![c(0.0, 0.3)],
            q: vec![c(0.2, 0.0)],
        };
        let sol = ErnstSolution::new(&pairs(g), ch).unwrap();
        assert!(matches!(sol.at(xi(0.7, 0.3)), Err(Error::RealityViolation(0))));
        assert!(sol.at_pair(xi(0.7, 0.3), xi(0.7, 0.3).conj()).is_ok());
    }

    #[test]
    fn real_part_identity() {
        for g in [1, 2] {
            let sol = solution(g);
            for &(r, z) in &POINTS {
                let pt = sol.at(xi(r, z)).unwrap();
                let e = pt.value().unwrap().e;
                assert!(rel(e + e.conj(), pt.real_part_formula().unwrap()) < 1e-10);
                assert!(e.re > 0.0);
            }
        }
    }

    #[test]
    fn first_derivatives_match_finite_differences() {
        let h = 1e-4;
        for g in [1, 2] {
            let sol = solution(g);
            for &(r, z) in &POINTS[..2] {
                let (x, y) = (xi(r, z), xi(r, z).conj());
                let f = |a: C64, b: C64| sol.at_pair(a, b).unwrap().value().unwrap().e;
                let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
                let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
                let pt = sol.at(x).unwrap();
                assert!(rel(pt.d_xi().unwrap(), fx) < 1e-5, "g={g} ξ");
                assert!(rel(pt.d_xibar().unwrap(), fy) < 1e-5, "g={g} ξ̄");
            }
        }
    }

    #[test]
    fn laplace_matches_finite_differences_and_rhs() {
        let h = 1e-3;
        for g in [1, 2] {
            let sol = solution(g);
            for &(r, z) in &POINTS[..2] {
                let f = |rho: f64, zeta: f64| sol.evaluate(xi(rho, zeta)).unwrap().e;
                let fd = (f(r + h, z) - 2.0 * f(r, z) + f(r - h, z)) / (h * h)
                    + (f(r + h, z) - f(r - h, z)) / (2.0 * h * r)
                    + (f(r, z + h) - 2.0 * f(r, z) + f(r, z - h)) / (h * h);
                let pt = sol.at(xi(r, z)).unwrap();
                let lap = pt.laplace().unwrap();
                assert!(rel(lap, fd) < 1e-4, "g={g} fd {:e}", rel(lap, fd));
                let e = pt.value().unwrap().e;
                let rhs = 8.0 * pt.d_xi().unwrap() * pt.d_xibar().unwrap() / (e + e.conj());
                assert!(rel(lap, rhs) < 1e-8);
            }
        }
    }

    #[test]
    fn ernst_equation_residual() {
        for (g, tol) in [(1, 1e-8), (2, 1e-7)] {
            let sol = solution(g);
            for &(r, z) in &POINTS {
                let res = sol.ernst_residual(xi(r, z)).unwrap();
                assert!(res < tol, "g={g} ({r},{z}): {res:e}");
            }
        }
    }

    #[test]
    fn path_symmetry() {
        let v = solution(2).evaluate(xi(0.9, -0.2)).unwrap();
        assert!(v.path_symmetry < 1e-8);
        assert!(v.theta_zero > DIVISOR_GUARD && v.theta_den > DIVISOR_GUARD);
    }
}
