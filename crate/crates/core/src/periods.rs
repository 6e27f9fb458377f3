//! Normalized holomorphic differentials, b-periods, Abel map, third-kind
//! differentials and Rauch variations.
//!
//! The unnormalized basis is `φ_k = λ^k dλ/μ`, `k = 0..g-1`. a-periods come
//! from the substitution `λ = m + r sin θ` on each cut, which removes the
//! square-root endpoint singularities; Abel integrals run along straight
//! rays to `∞⁺` (see [`crate::curve`] for the cycle geometry).

use std::f64::consts::PI;

use crate::curve::{HyperellipticCurve, PointKind, Sheet, SurfacePoint};
use crate::error::{Error, Result};
use crate::linalg::{imag_part, inverse_with_cond, max_abs, sym_eigenvalues, CMat};
use crate::quad::Quadrature;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeriodOptions {
    /// Gauss–Legendre order of every panel.
    pub quad_order: usize,
    /// Relative panel tolerance of the adaptive rule.
    pub rel_tol: f64,
    /// Recompute at doubled order and require agreement of `B` to 1e-9.
    pub convergence_gate: bool,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            quad_order: 64,
            rel_tol: 1e-14,
            convergence_gate: true,
        }
    }
}

/// A value of the Abel map together with the rays that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelValue {
    pub value: Vec<C64>,
    pub path: String,
}

/// Period data of a curve.
#[derive(Debug, Clone)]
pub struct PeriodData {
    curve: HyperellipticCurve,
    quad: Quadrature,
    /// `moments[α][k] = ∮_{a_α} λ^k dλ/μ` for `k = 0..=g`.
    moments: Vec<Vec<C64>>,
    a_mat: CMat,
    coeff: CMat,
    b: CMat,
    b_raw: CMat,
    cond: f64,
    orientation: f64,
    /// Unnormalized lift of every branch point, base at the base branch point.
    branch_lifts: Vec<Vec<C64>>,
    /// Unnormalized lift of `∞⁺`.
    inf_lift: Vec<C64>,
    symmetry_error: f64,
}

impl PeriodData {
    pub fn compute(curve: &HyperellipticCurve, opts: &PeriodOptions) -> Result<Self> {
        if opts.quad_order < 16 {
            return Err(Error::InvalidInput(format!("quad_order {} below 16", opts.quad_order)));
        }
        let pd = Self::compute_once(curve, opts.quad_order, opts.rel_tol)?;
        if opts.convergence_gate {
            let fine = Self::compute_once(curve, 2 * opts.quad_order, opts.rel_tol)?;
            let diff = max_abs(&(&fine.b - &pd.b)) / max_abs(&pd.b);
            if diff > 1e-9 {
                return Err(Error::NoConvergence(format!(
                    "period matrix changed by {diff:.2e} under order doubling"
                )));
            }
        }
        Ok(pd)
    }

    fn compute_once(curve: &HyperellipticCurve, order: usize, rel_tol: f64) -> Result<Self> {
        let g = curve.genus();
        let quad = Quadrature::new(order, rel_tol);
        let mut pd = PeriodData {
            curve: curve.clone(),
            quad,
            moments: Vec::new(),
            a_mat: CMat::zeros(g, g),
            coeff: CMat::zeros(g, g),
            b: CMat::zeros(g, g),
            b_raw: CMat::zeros(g, g),
            cond: 0.0,
            orientation: 1.0,
            branch_lifts: Vec::new(),
            inf_lift: Vec::new(),
            symmetry_error: 0.0,
        };

        let mut moments = Vec::with_capacity(g);
        for alpha in 0..g {
            moments.push(pd.cut_integral(alpha + 1, g + 1, |lam, out| {
                let mut p = C64::new(1.0, 0.0);
                for o in out.iter_mut() {
                    *o = p;
                    p *= lam;
                }
            })?);
        }
        pd.moments = moments;
        pd.a_mat = CMat::from_fn(g, g, |a, k| pd.moments[a][k]);
        let (inv, cond) = inverse_with_cond(&pd.a_mat.transpose())?;
        pd.coeff = inv;
        pd.cond = cond;

        let base = curve.base_index();
        let inf = pd.branch_ray(base, g)?;
        let mut lifts = Vec::with_capacity(curve.num_branch_points());
        for m in 0..curve.num_branch_points() {
            if m == base {
                lifts.push(vec![ZERO; g]);
            } else {
                let r = pd.branch_ray(m, g)?;
                lifts.push(inf.iter().zip(&r).map(|(a, b)| a - b).collect());
            }
        }
        pd.inf_lift = inf;
        pd.branch_lifts = lifts;

        // ray-cycle periods B[α][β] = Σ_k coeff[β][k] · 2 A_u(lead_α)_k, then
        // the a-cycle shift that makes the basis canonical
        let bu = CMat::from_fn(g, g, |a, k| 2.0 * pd.branch_lifts[curve.b_endpoint_index(a)][k]);
        let mut b = &bu * pd.coeff.transpose();
        let shift = curve.homology().b_shift;
        for a in 0..g {
            for k in 0..g {
                b[(a, k)] += shift[a][k] as f64;
            }
        }
        let ev = sym_eigenvalues(&symmetrized_imag(&b));
        if ev[g - 1] < 0.0 {
            pd.orientation = -1.0;
        } else if ev[0] <= 0.0 {
            return Err(Error::DivergentContext(ev[0]));
        }
        pd.b_raw = b * C64::new(pd.orientation, 0.0);
        pd.symmetry_error = max_abs(&(&pd.b_raw - pd.b_raw.transpose())) / max_abs(&pd.b_raw);
        pd.b = (&pd.b_raw + pd.b_raw.transpose()) * C64::new(0.5, 0.0);
        Ok(pd)
    }

    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    /// Symmetrized matrix of b-periods.
    pub fn b(&self) -> &CMat {
        &self.b
    }

    /// b-periods as integrated, before symmetrization.
    pub fn b_raw(&self) -> &CMat {
        &self.b_raw
    }

    /// `ω_β = Σ_k coeff[β][k] λ^k dλ/μ`.
    pub fn coeff(&self) -> &CMat {
        &self.coeff
    }

    /// `a_mat[α][k] = ∮_{a_α} λ^k dλ/μ`.
    pub fn a_mat(&self) -> &CMat {
        &self.a_mat
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn symmetry_error(&self) -> f64 {
        self.symmetry_error
    }

    /// `+1` when the b-cycles run as described in [`crate::curve`], `−1`
    /// when they had to be reversed to make `Im B` positive definite.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// `∮_{a_α} ω_β`, recomputed from the stored moments.
    pub fn normalized_a_periods(&self) -> CMat {
        &self.a_mat * self.coeff.transpose()
    }

    fn normalize(&self, u: &[C64]) -> Vec<C64> {
        (0..self.genus())
            .map(|b| (0..self.genus()).map(|k| self.coeff[(b, k)] * u[k]).sum())
            .collect()
    }

    /// `∮ f(λ) dλ/μ` over the counter-clockwise `+`-sheet loop around cut `j`,
    /// for `n` integrands written by `f(λ, out)`.
    pub(crate) fn cut_integral<F>(&self, j: usize, n: usize, mut f: F) -> Result<Vec<C64>>
    where
        F: FnMut(C64, &mut [C64]),
    {
        let cut = self.curve.cuts()[j];
        let mid = 0.5 * (cut.a + cut.b);
        let half = 0.5 * (cut.b - cut.a);
        let mut buf = vec![ZERO; n];
        let v = self.quad.integrate(n, -0.5 * PI, 0.5 * PI, |t, out| {
            let lam = mid + half * t.sin();
            let w = 2.0 * I / self.curve.mu_plus_without(lam, j);
            f(lam, &mut buf);
            for k in 0..n {
                out[k] = buf[k] * w;
            }
        })?;
        Ok(v)
    }

    /// `∫ λ^k dλ/μ₊`, `k < n`, from branch point `m` to `∞⁺` along its exit ray.
    fn branch_ray(&self, m: usize, n: usize) -> Result<Vec<C64>> {
        let e = self.curve.branch(m);
        let u = self.curve.exit_direction(m);
        let len = 0.5 * self.curve.distance_to_branch_points(e, Some(m));
        let c = &self.curve;
        let head = self.quad.integrate(n, 0.0, 1.0, |s, out| {
            let delta = u * (len * s * s);
            let w = u * (2.0 * len * s) / c.mu_plus_near_branch(m, delta);
            let lam = e + delta;
            powers(lam, w, out);
        })?;
        let tail = self.tail_ray(e + u * len, u, len, n)?;
        Ok(head.iter().zip(&tail).map(|(a, b)| a + b).collect())
    }

    /// `∫ λ^k dλ/μ₊` from a regular point `z` to `∞⁺` along direction `u`.
    fn tail_ray(&self, z: C64, u: C64, len: f64, n: usize) -> Result<Vec<C64>> {
        let c = &self.curve;
        self.quad.integrate(n, 0.0, 1.0, |v, out| {
            let om = 1.0 - v;
            let lam = z + u * (len * v / om);
            let w = u * (len / (om * om)) / c.mu_plus(lam);
            powers(lam, w, out);
        })
    }

    fn generic_ray(&self, lam: C64, u: C64) -> Result<Vec<C64>> {
        if self.curve.distance_to_cuts(lam) <= self.curve.delta_sep() {
            return Err(Error::PathThroughBranchPoint(format!("{lam} lies on a branch cut")));
        }
        let len = self.curve.distance_to_branch_points(lam, None).max(1e-3 * self.curve.diameter());
        self.tail_ray(lam, u, len, self.genus())
    }

    /// Unnormalized Abel lift from the base point.
    fn lift_unnormalized(&self, p: &SurfacePoint, dir: Option<C64>) -> Result<(Vec<C64>, String)> {
        match self.curve.classify(p) {
            PointKind::Infinity(s) => Ok((self.inf_lift.iter().map(|z| z * s.sign()).collect(), "base ray".into())),
            PointKind::Branch(m) => Ok((self.branch_lifts[m].clone(), format!("ray from branch point {m}"))),
            PointKind::Generic { lambda, sheet } => {
                let u = match dir {
                    Some(u) => {
                        let u = u / u.norm();
                        if self.curve.ray_clearance(lambda, u, None) <= self.curve.delta_sep() {
                            return Err(Error::PathThroughBranchPoint(format!("ray from {lambda} along {u} meets a cut")));
                        }
                        u
                    }
                    None => self.curve.choose_exit(lambda, None)?,
                };
                let r = self.generic_ray(lambda, u)?;
                let v = self.inf_lift.iter().zip(&r).map(|(a, b)| (a - b) * sheet.sign()).collect();
                Ok((v, format!("ray from {lambda} along {u:.3}")))
            }
        }
    }

    /// Normalized Abel map from the base point to `p` (defined modulo the
    /// period lattice; the representative is fixed by the ray rule).
    pub fn abel_lift(&self, p: &SurfacePoint) -> Result<Vec<C64>> {
        Ok(self.normalize(&self.lift_unnormalized(p, None)?.0))
    }

    /// As [`abel_lift`](Self::abel_lift) with an explicit ray direction for a
    /// generic point.
    pub fn abel_lift_along(&self, p: &SurfacePoint, dir: C64) -> Result<Vec<C64>> {
        Ok(self.normalize(&self.lift_unnormalized(p, Some(dir))?.0))
    }

    /// `∫_from^to ω` along the canonical path class.
    pub fn abel(&self, from: &SurfacePoint, to: &SurfacePoint) -> Result<AbelValue> {
        if from == to {
            return Ok(AbelValue {
                value: vec![ZERO; self.genus()],
                path: "empty".into(),
            });
        }
        let (a, pa) = self.lift_unnormalized(from, None)?;
        let (b, pb) = self.lift_unnormalized(to, None)?;
        let d: Vec<C64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
        Ok(AbelValue {
            value: self.normalize(&d),
            path: format!("({pb}) minus ({pa})"),
        })
    }

    /// `ω(p)/dτ` in the local parameter of `p`: `λ` at regular points,
    /// `√(λ − λ_m)` at branch points and `1/λ` at `∞±`.
    pub fn eval_normalized_diff(&self, p: &SurfacePoint) -> Vec<C64> {
        let g = self.genus();
        let phi: Vec<C64> = match self.curve.classify(p) {
            PointKind::Generic { lambda, sheet } => {
                let mut v = vec![ZERO; g];
                powers(lambda, 1.0 / (self.curve.mu_plus(lambda) * sheet.sign()), &mut v);
                v
            }
            PointKind::Branch(m) => {
                let mut v = vec![ZERO; g];
                powers(self.curve.branch(m), 2.0 / self.curve.branch_sqrt(m), &mut v);
                v
            }
            PointKind::Infinity(s) => {
                let mut v = vec![ZERO; g];
                v[g - 1] = C64::new(-s.sign(), 0.0);
                v
            }
        };
        self.normalize(&phi)
    }

    /// Third-kind differential `ω_{a,c}` with residue `+1` at `a`, `−1` at `c`
    /// and vanishing a-periods.
    pub fn third_kind(&self, a: &SurfacePoint, c: &SurfacePoint) -> Result<ThirdKind<'_>> {
        ThirdKind::new(self, a, c)
    }

    /// `∂B/∂λ_m = πi v vᵀ` with `v = ω(λ_m)/dτ`.
    pub fn rauch_db(&self, m: usize) -> CMat {
        let v = self.eval_normalized_diff(&self.curve.branch_point(m));
        let g = self.genus();
        CMat::from_fn(g, g, |a, b| v[a] * v[b] * I * (PI * self.orientation))
    }

    /// `∂/∂λ_m ∫_q^p ω = ½ v ω_{p,q}(λ_m)/dτ` for points `p`, `q` that are
    /// not branch points (their λ, or `1/λ` at infinity, held fixed).
    pub fn rauch_abel(&self, m: usize, p: &SurfacePoint, q: &SurfacePoint) -> Result<Vec<C64>> {
        let bp = self.curve.branch_point(m);
        let v = self.eval_normalized_diff(&bp);
        let t = self.third_kind(p, q)?.eval(&bp)?;
        Ok(v.iter().map(|x| 0.5 * x * t).collect())
    }

    pub(crate) fn moment(&self, alpha: usize, k: usize) -> C64 {
        self.moments[alpha][k]
    }
}

fn symmetrized_imag(b: &CMat) -> nalgebra::DMatrix<f64> {
    let im = imag_part(b);
    (&im + im.transpose()) * 0.5
}

#[inline]
fn powers(lam: C64, w: C64, out: &mut [C64]) {
    let mut p = w;
    for o in out.iter_mut() {
        *o = p;
        p *= lam;
    }
}

/// Pole of a third-kind differential.
#[derive(Debug, Clone, Copy)]
enum Pole {
    Generic { lam: C64, mu: C64 },
    Branch(usize),
    Inf(f64),
}

/// Normalized differential of the third kind `ω_{a,c}`.
#[derive(Debug, Clone)]
pub struct ThirdKind<'a> {
    pd: &'a PeriodData,
    a: Pole,
    c: Pole,
    points: (SurfacePoint, SurfacePoint),
    /// a-periods of the rational part; `ω_{a,c} = Ω_a − Ω_c − Σ corr_β ω_β`.
    corr: Vec<C64>,
}

impl<'a> ThirdKind<'a> {
    fn new(pd: &'a PeriodData, a: &SurfacePoint, c: &SurfacePoint) -> Result<Self> {
        let pa = Self::pole(pd, a)?;
        let pc = Self::pole(pd, c)?;
        let same = match (pd.curve.classify(a), pd.curve.classify(c)) {
            (PointKind::Branch(x), PointKind::Branch(y)) => x == y,
            (PointKind::Infinity(x), PointKind::Infinity(y)) => x == y,
            (PointKind::Generic { lambda: l1, sheet: s1 }, PointKind::Generic { lambda: l2, sheet: s2 }) => {
                s1 == s2 && (l1 - l2).norm() <= pd.curve.delta_sep()
            }
            _ => false,
        };
        if same {
            return Err(Error::CoincidingPoles);
        }
        let ra = Self::pole_a_periods(pd, pa)?;
        let rc = Self::pole_a_periods(pd, pc)?;
        // ω_β have unit a-periods, so the correction is the a-period vector itself
        let diff: Vec<C64> = ra.iter().zip(&rc).map(|(x, y)| x - y).collect();
        Ok(ThirdKind {
            pd,
            a: pa,
            c: pc,
            points: (*a, *c),
            corr: diff,
        })
    }

    fn pole(pd: &PeriodData, p: &SurfacePoint) -> Result<Pole> {
        Ok(match pd.curve.classify(p) {
            PointKind::Generic { lambda, sheet } => {
                if pd.curve.distance_to_cuts(lambda) <= pd.curve.delta_sep() {
                    return Err(Error::PathThroughBranchPoint(format!("pole {lambda} lies on a branch cut")));
                }
                Pole::Generic {
                    lam: lambda,
                    mu: pd.curve.mu_plus(lambda) * sheet.sign(),
                }
            }
            PointKind::Branch(m) => Pole::Branch(m),
            PointKind::Infinity(s) => Pole::Inf(s.sign()),
        })
    }

    /// `∮_{a_β} Ω_P` for every β.
    fn pole_a_periods(pd: &PeriodData, p: Pole) -> Result<Vec<C64>> {
        let g = pd.genus();
        match p {
            Pole::Generic { lam, mu } => {
                let mut out = Vec::with_capacity(g);
                for beta in 0..g {
                    let v = pd.cut_integral(beta + 1, 1, |l, o| o[0] = 1.0 / (l - lam))?;
                    out.push(0.5 * mu * v[0]);
                }
                Ok(out)
            }
            // the loop around the cut winds once around its own endpoints
            Pole::Branch(m) => Ok((0..g).map(|beta| if m / 2 == beta + 1 { I * PI } else { ZERO }).collect()),
            Pole::Inf(s) => Ok((0..g).map(|beta| -0.5 * s * pd.moment(beta, g)).collect()),
        }
    }

    /// `Ω_P(target)/dτ`; at `∞±` the finite part after removing any pole.
    fn rational_at(&self, p: Pole, target: PointKind) -> Result<C64> {
        let curve = &self.pd.curve;
        let g = self.pd.genus() as i32;
        Ok(match target {
            PointKind::Generic { lambda, sheet } => {
                let mu = curve.mu_plus(lambda) * sheet.sign();
                match p {
                    Pole::Generic { lam, mu: mp } => (mu + mp) / (2.0 * (lambda - lam) * mu),
                    Pole::Branch(m) => 1.0 / (2.0 * (lambda - curve.branch(m))),
                    Pole::Inf(s) => -0.5 * s * lambda.powi(g) / mu,
                }
            }
            PointKind::Branch(mb) => {
                let e = curve.branch(mb);
                let sb = curve.branch_sqrt(mb);
                match p {
                    Pole::Generic { lam, mu } => mu / ((e - lam) * sb),
                    Pole::Branch(m) if m == mb => return Err(Error::CoincidingPoints),
                    Pole::Branch(_) => ZERO,
                    Pole::Inf(s) => -s * e.powi(g) / sb,
                }
            }
            PointKind::Infinity(t) => match p {
                Pole::Generic { lam, .. } => -0.5 * lam,
                Pole::Branch(m) => -0.5 * curve.branch(m),
                Pole::Inf(s) => C64::new(0.25 * s * t.sign(), 0.0) * curve.branch_sum(),
            },
        })
    }

    /// `ω_{a,c}(b)/dτ_b` in the local parameter of `b`.
    pub fn eval(&self, b: &SurfacePoint) -> Result<C64> {
        let kind = self.pd.curve.classify(b);
        let hits = |p: Pole| match (p, kind) {
            (Pole::Inf(s), PointKind::Infinity(t)) => s == t.sign(),
            (Pole::Generic { lam, mu }, PointKind::Generic { lambda, sheet }) => {
                (lam - lambda).norm() <= self.pd.curve.delta_sep()
                    && (mu - self.pd.curve.mu_plus(lambda) * sheet.sign()).norm() <= 0.5 * mu.norm()
            }
            _ => false,
        };
        if hits(self.a) || hits(self.c) {
            return Err(Error::CoincidingPoints);
        }
        let r = self.rational_at(self.a, kind)? - self.rational_at(self.c, kind)?;
        let w = self.pd.eval_normalized_diff(b);
        Ok(r - self.corr.iter().zip(&w).map(|(x, y)| x * y).sum::<C64>())
    }

    /// `ω_{a,c}/dλ` at a regular `λ` on the given sheet.
    pub fn eval_dlambda(&self, lambda: C64, sheet: Sheet) -> Result<C64> {
        self.eval(&SurfacePoint::Finite { lambda, sheet })
    }

    pub fn poles(&self) -> (SurfacePoint, SurfacePoint) {
        self.points
    }

    /// Coefficients of the holomorphic correction.
    pub fn correction(&self) -> &[C64] {
        &self.corr
    }

    /// Integral along the full line `z0 + t u`, `t ∈ ℝ`, entering from
    /// infinity on `start` and changing sheet at every cut it crosses.
    pub fn integrate_line(&self, z0: C64, u: C64, start: Sheet) -> Result<C64> {
        if matches!(self.a, Pole::Inf(_)) || matches!(self.c, Pole::Inf(_)) {
            return Err(Error::InvalidInput("line integral with a pole at infinity".into()));
        }
        let curve = &self.pd.curve;
        let u = u / u.norm();
        for m in 0..curve.num_branch_points() {
            let e = curve.branch(m);
            let t = ((e - z0) * u.conj()).re;
            if (z0 + u * t - e).norm() <= curve.delta_sep() {
                return Err(Error::PathThroughBranchPoint(format!("line passes through branch point {m}")));
            }
        }
        let len = curve.diameter().max(1.0);
        let to_v = |t: f64| (t / len).atan() * 2.0 / PI;
        let mut breaks = vec![-1.0];
        for cut in curve.cuts() {
            let d = cut.b - cut.a;
            let den = u.re * d.im - u.im * d.re;
            if den.abs() < 1e-300 {
                continue;
            }
            let w = cut.a - z0;
            let t = (w.re * d.im - w.im * d.re) / den;
            let s = (w.re * u.im - w.im * u.re) / den;
            if (0.0..=1.0).contains(&s) {
                breaks.push(to_v(t));
            }
        }
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.push(1.0);
        let mut sheet = start;
        let mut total = ZERO;
        for w in breaks.windows(2) {
            let mut err = None;
            let v = self.pd.quad.integrate(1, w[0], w[1], |v, out| {
                let arg = 0.5 * PI * v;
                let t = len * arg.tan();
                let jac = len * 0.5 * PI / (arg.cos() * arg.cos());
                match self.eval_dlambda(z0 + u * t, sheet) {
                    Ok(x) => out[0] = x * u * jac,
                    Err(e) => {
                        err.get_or_insert(e);
                        out[0] = ZERO;
                    }
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            total += v[0];
            sheet = sheet.flip();
        }
        Ok(total)
    }

    /// `∫_p^{∞}` along the ray `λ(p) + t u` on the sheet of `p`, the path used
    /// by [`PeriodData::abel_lift_along`].
    pub fn integrate_ray(&self, p: &SurfacePoint, u: C64) -> Result<C64> {
        let (lam0, sheet) = match self.pd.curve.classify(p) {
            PointKind::Generic { lambda, sheet } => (lambda, sheet),
            _ => return Err(Error::InvalidInput("ray integral needs a regular start point".into())),
        };
        let u = u / u.norm();
        let curve = &self.pd.curve;
        if curve.ray_clearance(lam0, u, None) <= curve.delta_sep() {
            return Err(Error::PathThroughBranchPoint(format!("ray from {lam0} along {u} meets a cut")));
        }
        let len = curve.distance_to_branch_points(lam0, None).max(1e-3 * curve.diameter());
        let mut err = None;
        let v = self.pd.quad.integrate(1, 0.0, 1.0, |v, out| {
            let om = 1.0 - v;
            let lam = lam0 + u * (len * v / om);
            match self.eval_dlambda(lam, sheet) {
                Ok(x) => out[0] = x * u * (len / (om * om)),
                Err(e) => {
                    err.get_or_insert(e);
                    out[0] = ZERO;
                }
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(v[0]),
        }
    }

    /// Integral around the closed curve `λ(t)`, `t ∈ [0, 2π]`, kept on one
    /// sheet (the curve must not cross any cut).
    pub fn integrate_closed<F>(&self, path: F, sheet: Sheet) -> Result<C64>
    where
        F: Fn(f64) -> (C64, C64),
    {
        let mut err = None;
        let v = self.pd.quad.integrate(1, 0.0, 2.0 * PI, |t, out| {
            let (lam, dlam) = path(t);
            match self.eval_dlambda(lam, sheet) {
                Ok(x) => out[0] = x * dlam,
                Err(e) => {
                    err.get_or_insert(e);
                    out[0] = ZERO;
                }
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(v[0]),
        }
    }

    /// `1/(2πi) ∮` around a small circle about a regular point.
    pub fn residue_at(&self, p: &SurfacePoint, radius: f64) -> Result<C64> {
        let (lam, sheet) = match self.pd.curve.classify(p) {
            PointKind::Generic { lambda, sheet } => (lambda, sheet),
            _ => return Err(Error::InvalidInput("residue check needs a regular point".into())),
        };
        if self.pd.curve.distance_to_cuts(lam) <= 2.0 * radius {
            return Err(Error::InvalidInput("circle would cross a branch cut".into()));
        }
        let v = self.integrate_closed(
            |t| {
                let e = C64::from_polar(radius, t);
                (lam + e, I * e)
            },
            sheet,
        )?;
        Ok(v / (2.0 * PI * I))
    }

    /// `∮_{a_β} ω_{a,c}` computed on an ellipse around the cut, independent of
    /// the collapsed-loop formula used to normalize.
    pub fn a_period_check(&self, beta: usize) -> Result<C64> {
        let curve = &self.pd.curve;
        let cut = curve.cuts()[beta + 1];
        let mid = 0.5 * (cut.a + cut.b);
        let half = 0.5 * (cut.b - cut.a);
        let mut clear = f64::INFINITY;
        for (k, c) in curve.cuts().iter().enumerate() {
            if k != beta + 1 {
                clear = clear.min(crate::curve::seg_point_dist(mid, c.a, c.b) - half.norm());
            }
        }
        for p in [self.a, self.c] {
            if let Pole::Generic { lam, .. } = p {
                clear = clear.min(crate::curve::seg_point_dist(lam, cut.a, cut.b));
            }
        }
        let eta = (0.3 * clear.max(1e-6) / half.norm()).min(0.5).asinh();
        self.integrate_closed(
            |t| {
                let w = C64::new(eta, t);
                (mid + half * w.cosh(), half * w.sinh() * I)
            },
            Sheet::Plus,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ErnstCurve;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn agm(mut a: f64, mut b: f64) -> f64 {
        while (a - b).abs() > 1e-15 * a {
            let t = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = t;
        }
        a
    }

    fn ellk(k: f64) -> f64 {
        0.5 * PI / agm(1.0, (1.0 - k * k).sqrt())
    }

    fn genus2() -> HyperellipticCurve {
        HyperellipticCurve::from_branch_points(&[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0), c(4.0, 0.0)]).unwrap()
    }

    fn ernst2() -> ErnstCurve {
        ErnstCurve::new(c(0.4, -1.1), &[(c(-2.5, 0.8), c(-2.5, -0.8)), (c(1.5, 0.0), c(2.6, 0.0))]).unwrap()
    }

    /// Reduces `z` modulo `ℤ^g + Bℤ^g` and returns the distance to the lattice.
    fn lattice_distance(pd: &PeriodData, z: &[C64]) -> f64 {
        let g = pd.genus();
        let im = crate::linalg::imag_part(pd.b());
        let y = nalgebra::DVector::from_iterator(g, z.iter().map(|x| x.im));
        let m = im.lu().solve(&y).unwrap().map(|x| x.round());
        (0..g)
            .map(|a| {
                let bm: C64 = (0..g).map(|b| pd.b()[(a, b)] * m[b]).sum();
                let r = z[a] - bm;
                (r.re - r.re.round()).abs() + r.im.abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn elliptic_modulus_oracle() {
        let k = 0.5;
        let curve = HyperellipticCurve::from_branch_points(&[c(-1.0 / k, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(1.0 / k, 0.0)]).unwrap();
        let pd = PeriodData::compute(&curve, &PeriodOptions::default()).unwrap();
        let kp = (1.0 - k * k).sqrt();
        let expected = 2.0 * ellk(k) / ellk(kp);
        let b = pd.b()[(0, 0)];
        assert!((b.im - expected).abs() < 1e-9 * expected, "{b} vs {expected}");
        assert!((b.re - b.re.round()).abs() < 1e-12, "{b}");
    }

    #[test]
    fn normalization_symmetry_positivity() {
        for curve in [genus2(), ernst2().curve().clone()] {
            let pd = PeriodData::compute(&curve, &PeriodOptions::default()).unwrap();
            let a = pd.normalized_a_periods();
            assert!((a - CMat::identity(2, 2)).iter().all(|z| z.norm() < 1e-12));
            assert!(pd.symmetry_error() < 1e-10, "{:?} {}", curve.cuts(), pd.b_raw());
            assert!(sym_eigenvalues(&imag_part(pd.b()))[0] > 0.0);
            assert!(curve.homology().is_canonical());
        }
    }

    #[test]
    fn ernst_half_periods() {
        let k = ernst2();
        let pd = PeriodData::compute(k.curve(), &PeriodOptions::default()).unwrap();
        let w = pd.abel(&k.xi_point(), &k.xibar_point()).unwrap().value;
        let shifted: Vec<C64> = w.iter().map(|z| z + 0.5).collect();
        assert!(lattice_distance(&pd, &shifted) < 1e-8, "{w:?}");
        let up = pd.abel(&k.xi_point(), &SurfacePoint::inf_plus()).unwrap().value;
        let dn = pd.abel(&k.xi_point(), &SurfacePoint::inf_minus()).unwrap().value;
        assert!(up.iter().zip(&dn).all(|(a, b)| (a + b).norm() < 1e-8));
        let p = SurfacePoint::plus(c(0.7, 0.3));
        assert!(pd.abel(&p, &p).unwrap().value.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn alternative_rays_differ_by_lattice_vectors() {
        let pd = PeriodData::compute(&genus2(), &PeriodOptions::default()).unwrap();
        for lam in [c(0.1, 0.2), c(2.0, -1.5), c(-2.0, 0.3)] {
            let p = SurfacePoint::minus(lam);
            let a = pd.abel_lift(&p).unwrap();
            for dir in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 1.0)] {
                let Ok(b) = pd.abel_lift_along(&p, dir) else { continue };
                let d: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                assert!(lattice_distance(&pd, &d) < 1e-8, "{lam} {dir}: {d:?}");
            }
        }
    }

    #[test]
    fn differential_matches_abel_derivative() {
        let pd = PeriodData::compute(&genus2(), &PeriodOptions::default()).unwrap();
        let lam = c(1.7, 0.9);
        let h = 1e-4;
        let dir = c(0.0, 1.0);
        let f = |z: C64| pd.abel_lift_along(&SurfacePoint::minus(z), dir).unwrap();
        let fd: Vec<C64> = f(lam + h).iter().zip(&f(lam - h)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let w = pd.eval_normalized_diff(&SurfacePoint::minus(lam));
        for (x, y) in fd.iter().zip(&w) {
            assert!((x - y).norm() < 1e-6 * y.norm().max(1.0), "{x} vs {y}");
        }
        let k = ernst2();
        let pe = PeriodData::compute(k.curve(), &PeriodOptions::default()).unwrap();
        for m in 0..6 {
            assert!(pe.eval_normalized_diff(&k.curve().branch_point(m)).iter().all(|z| z.norm() > 1e-8));
        }
    }

    #[test]
    fn third_kind_residues_and_periods() {
        let pd = PeriodData::compute(&genus2(), &PeriodOptions::default()).unwrap();
        let a = SurfacePoint::plus(c(1.5, 1.2));
        let cc = SurfacePoint::minus(c(-2.0, -0.7));
        let tk = pd.third_kind(&a, &cc).unwrap();
        assert!((tk.residue_at(&a, 0.05).unwrap() - 1.0).norm() < 1e-8);
        assert!((tk.residue_at(&cc, 0.05).unwrap() + 1.0).norm() < 1e-8);
        assert!(tk.residue_at(&a.involution(), 0.05).unwrap().norm() < 1e-8);
        for beta in 0..2 {
            assert!(tk.a_period_check(beta).unwrap().norm() < 1e-9);
        }
        for (p, q) in [
            (SurfacePoint::inf_plus(), SurfacePoint::inf_minus()),
            (SurfacePoint::inf_minus(), a),
            (pd.curve().branch_point(1), SurfacePoint::inf_plus()),
        ] {
            let tk = pd.third_kind(&p, &q).unwrap();
            for beta in 0..2 {
                assert!(tk.a_period_check(beta).unwrap().norm() < 1e-9);
            }
        }
        assert!(matches!(pd.third_kind(&a, &a), Err(Error::CoincidingPoles)));
    }

    #[test]
    fn third_kind_line_integral_through_base_cut() {
        let k = ernst2();
        let pd = PeriodData::compute(k.curve(), &PeriodOptions::default()).unwrap();
        let tk = pd.third_kind(&k.xi_point(), &k.xibar_point()).unwrap();
        let z0 = c(k.zeta(), -0.5 * k.rho());
        // right to left: the loop through infinity winds counter-clockwise around ξ
        let v = tk.integrate_line(z0, c(-1.0, 0.0), Sheet::Minus).unwrap();
        assert!((v - C64::new(0.0, PI)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn rauch_matches_finite_differences() {
        let curve = genus2();
        let opts = PeriodOptions {
            convergence_gate: false,
            ..Default::default()
        };
        let pd = PeriodData::compute(&curve, &opts).unwrap();
        let p = SurfacePoint::plus(c(1.7, 0.9));
        let q = SurfacePoint::inf_minus();
        let h = 1e-5;
        for m in 0..curve.num_branch_points() {
            let plus = PeriodData::compute(&curve.with_branch_shift(m, c(h, 0.0)).unwrap(), &opts).unwrap();
            let minus = PeriodData::compute(&curve.with_branch_shift(m, c(-h, 0.0)).unwrap(), &opts).unwrap();
            let fd = (plus.b() - minus.b()) / C64::new(2.0 * h, 0.0);
            let an = pd.rauch_db(m);
            let err = max_abs(&(&fd - &an)) / max_abs(&an);
            assert!(err < 1e-5, "dB/dλ_{m}: {err:e}");

            let ab = |x: &PeriodData| {
                let a = x.abel_lift_along(&p, c(0.0, 1.0)).unwrap();
                let b = x.abel_lift(&q).unwrap();
                a.iter().zip(&b).map(|(s, t)| s - t).collect::<Vec<_>>()
            };
            let fd: Vec<C64> = ab(&plus).iter().zip(&ab(&minus)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let an = pd.rauch_abel(m, &p, &q).unwrap();
            for (x, y) in fd.iter().zip(&an) {
                assert!((x - y).norm() < 1e-5 * y.norm().max(1e-3), "abel m={m}: {x} vs {y}");
            }
        }
    }
}
