//! Riemann theta functions with characteristics,
//!
//! `Θ_pq(z|B) = Σ_m exp{πi⟨B(m+p), m+p⟩ + 2πi⟨m+p, z+q⟩}`,
//!
//! together with term-by-term gradients and Hessians in `z`.
//!
//! Every evaluation goes through the zero-characteristic function at the
//! shifted argument `z + Bp + q`; the lattice sum is taken over an
//! ellipsoid `‖m + c‖_Y ≤ R` centred on the dominant term
//! (`c = Y⁻¹ Im z`, `Y = Im B`), so large imaginary parts cost nothing extra.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{imag_part, sym_eigenvalues, CMat};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Characteristic vectors `(p, q)`; complex entries are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristics {
    pub p: Vec<C64>,
    pub q: Vec<C64>,
}

impl Characteristics {
    pub fn zero(g: usize) -> Self {
        Characteristics {
            p: vec![ZERO; g],
            q: vec![ZERO; g],
        }
    }

    pub fn real(p: &[f64], q: &[f64]) -> Self {
        Characteristics {
            p: p.iter().map(|&x| C64::new(x, 0.0)).collect(),
            q: q.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn genus(&self) -> usize {
        self.p.len()
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().chain(&self.q).all(|z| *z == ZERO)
    }

    /// True when `2p` and `2q` are real integer vectors.
    pub fn is_half_integer(&self) -> bool {
        self.p.iter().chain(&self.q).all(|z| {
            let t = 2.0 * z;
            t.im.abs() < 1e-12 && (t.re - t.re.round()).abs() < 1e-12
        })
    }

    /// `4⟨p, q⟩ mod 2` for half-integer characteristics: 0 even, 1 odd.
    pub fn parity(&self) -> Option<u8> {
        if !self.is_half_integer() {
            return None;
        }
        let s: f64 = self.p.iter().zip(&self.q).map(|(a, b)| 4.0 * a.re * b.re).sum();
        Some((s.round() as i64).rem_euclid(2) as u8)
    }

    /// `Bp + q`.
    pub fn shift(&self, b: &CMat) -> Vec<C64> {
        let g = self.genus();
        (0..g)
            .map(|i| (0..g).map(|j| b[(i, j)] * self.p[j]).sum::<C64>() + self.q[i])
            .collect()
    }
}

/// All `4^g` half-integer characteristics in a fixed order.
pub fn half_characteristics(g: usize) -> Vec<Characteristics> {
    (0..1usize << (2 * g))
        .map(|bits| {
            let p: Vec<f64> = (0..g).map(|i| 0.5 * ((bits >> i) & 1) as f64).collect();
            let q: Vec<f64> = (0..g).map(|i| 0.5 * ((bits >> (g + i)) & 1) as f64).collect();
            Characteristics::real(&p, &q)
        })
        .collect()
}

/// The `2^{g-1}(2^g - 1)` odd half-integer characteristics.
pub fn odd_characteristics(g: usize) -> Vec<Characteristics> {
    half_characteristics(g).into_iter().filter(|c| c.parity() == Some(1)).collect()
}

/// Value, gradient and Hessian of a theta function at one point.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub value: C64,
    pub grad: Vec<C64>,
    pub hess: CMat,
}

/// Residuals of the heat equation for one index pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HeatResidual {
    /// `|4πi ∂Θ/∂B_αβ − ∂²Θ/∂z_α∂z_β|`, relative.
    pub kappa1: f64,
    /// `|4πi ∂Θ/∂B_αβ − 2∂²Θ/∂z_α∂z_β|`, relative.
    pub kappa2: f64,
    /// The factor with the smaller residual.
    pub kappa: f64,
    pub residual: f64,
}

/// Period matrix plus truncation data.
#[derive(Debug, Clone)]
pub struct ThetaContext {
    b: CMat,
    y: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    tol: f64,
    r2: f64,
    lambda_min: f64,
}

impl ThetaContext {
    pub fn new(b: &CMat, tol: f64) -> Result<Self> {
        let g = b.nrows();
        let y = imag_part(b);
        let y = (&y + y.transpose()) * 0.5;
        let ev = sym_eigenvalues(&y);
        if ev.is_empty() || !(ev[0] > 0.0) {
            return Err(Error::DivergentContext(ev.first().copied().unwrap_or(f64::NAN)));
        }
        let y_inv = y.clone().try_inverse().ok_or(Error::DivergentContext(ev[0]))?;
        let tol = tol.clamp(1e-300, 0.5);
        // margin covers the polynomial growth of the derivative terms
        let r2 = -tol.ln() / PI + 2.0 * g as f64 + 2.0;
        Ok(ThetaContext {
            b: b.clone(),
            y,
            y_inv,
            tol,
            r2,
            lambda_min: ev[0],
        })
    }

    pub fn genus(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Euclidean summation radius `√(R²/λ_min)` of the ellipsoid.
    pub fn radius(&self) -> f64 {
        (self.r2 / self.lambda_min).sqrt()
    }

    /// Upper estimate of the discarded tail, relative to the largest term.
    pub fn tail_bound(&self) -> f64 {
        self.tol
    }

    fn lattice(&self, c: &[f64]) -> Vec<Vec<i64>> {
        let g = self.genus();
        let lo: Vec<i64> = (0..g)
            .map(|i| (-c[i] - (self.r2 * self.y_inv[(i, i)]).sqrt()).ceil() as i64)
            .collect();
        let hi: Vec<i64> = (0..g)
            .map(|i| (-c[i] + (self.r2 * self.y_inv[(i, i)]).sqrt()).floor() as i64)
            .collect();
        let mut out = Vec::new();
        let mut m = lo.clone();
        if (0..g).any(|i| lo[i] > hi[i]) {
            return out;
        }
        loop {
            let d: Vec<f64> = (0..g).map(|i| m[i] as f64 + c[i]).collect();
            let mut qf = 0.0;
            for i in 0..g {
                for j in 0..g {
                    qf += d[i] * self.y[(i, j)] * d[j];
                }
            }
            if qf <= self.r2 {
                out.push(m.clone());
            }
            let mut k = 0;
            loop {
                if k == g {
                    return out;
                }
                if m[k] < hi[k] {
                    m[k] += 1;
                    break;
                }
                m[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Zero-characteristic theta and derivatives up to `order` (0, 1 or 2).
    fn jet0(&self, z: &[C64], order: usize) -> ThetaJet {
        let g = self.genus();
        let yz: Vec<f64> = z.iter().map(|w| w.im).collect();
        let c: Vec<f64> = (0..g).map(|i| (0..g).map(|j| self.y_inv[(i, j)] * yz[j]).sum()).collect();
        let mut value = ZERO;
        let mut grad = vec![ZERO; g];
        let mut hess = CMat::zeros(g, g);
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        for m in self.lattice(&c) {
            let mf: Vec<f64> = m.iter().map(|&x| x as f64).collect();
            let mut e = ZERO;
            for i in 0..g {
                let mut row = ZERO;
                for j in 0..g {
                    row += self.b[(i, j)] * mf[j];
                }
                e += mf[i] * (0.5 * row + z[i]);
            }
            let t = (two_pi_i * e).exp();
            value += t;
            if order >= 1 {
                for i in 0..g {
                    grad[i] += two_pi_i * mf[i] * t;
                }
            }
            if order >= 2 {
                for i in 0..g {
                    for j in 0..g {
                        hess[(i, j)] += two_pi_i * two_pi_i * (mf[i] * mf[j]) * t;
                    }
                }
            }
        }
        ThetaJet { value, grad, hess }
    }

    /// `Θ_pq(z)` with gradient and Hessian up to `order`.
    pub fn jet(&self, z: &[C64], ch: &Characteristics, order: usize) -> ThetaJet {
        let g = self.genus();
        if ch.is_zero() {
            return self.jet0(z, order);
        }
        let s = ch.shift(&self.b);
        let zs: Vec<C64> = (0..g).map(|i| z[i] + s[i]).collect();
        let inner = self.jet0(&zs, order);
        let bp: Vec<C64> = (0..g).map(|i| (0..g).map(|j| self.b[(i, j)] * ch.p[j]).sum()).collect();
        let pi_i = C64::new(0.0, PI);
        let expo: C64 = (0..g)
            .map(|i| pi_i * bp[i] * ch.p[i] + 2.0 * pi_i * ch.p[i] * (z[i] + ch.q[i]))
            .sum();
        let f = expo.exp();
        let tp: Vec<C64> = ch.p.iter().map(|x| 2.0 * pi_i * x).collect();
        let value = f * inner.value;
        let mut grad = vec![ZERO; g];
        let mut hess = CMat::zeros(g, g);
        if order >= 1 {
            for i in 0..g {
                grad[i] = f * (inner.grad[i] + tp[i] * inner.value);
            }
        }
        if order >= 2 {
            for i in 0..g {
                for j in 0..g {
                    hess[(i, j)] = f * (inner.hess[(i, j)] + tp[i] * inner.grad[j] + tp[j] * inner.grad[i] + tp[i] * tp[j] * inner.value);
                }
            }
        }
        ThetaJet { value, grad, hess }
    }

    /// Natural size `|f|·exp(π yᵀY⁻¹y)` of `Θ_pq(z)`, `y = Im(z + Bp + q)`,
    /// used to judge proximity to the theta divisor.
    pub fn magnitude(&self, z: &[C64], ch: &Characteristics) -> f64 {
        let g = self.genus();
        let s = ch.shift(&self.b);
        let y: Vec<f64> = (0..g).map(|i| (z[i] + s[i]).im).collect();
        let mut qf = 0.0;
        for i in 0..g {
            for j in 0..g {
                qf += y[i] * self.y_inv[(i, j)] * y[j];
            }
        }
        let pi_i = C64::new(0.0, PI);
        let bp: Vec<C64> = (0..g).map(|i| (0..g).map(|j| self.b[(i, j)] * ch.p[j]).sum()).collect();
        let expo: C64 = (0..g)
            .map(|i| pi_i * bp[i] * ch.p[i] + 2.0 * pi_i * ch.p[i] * (z[i] + ch.q[i]))
            .sum();
        (expo.re + PI * qf).exp()
    }

    pub fn theta(&self, z: &[C64], ch: &Characteristics) -> C64 {
        self.jet(z, ch, 0).value
    }

    pub fn grad(&self, z: &[C64], ch: &Characteristics) -> Vec<C64> {
        self.jet(z, ch, 1).grad
    }

    pub fn hess(&self, z: &[C64], ch: &Characteristics) -> CMat {
        self.jet(z, ch, 2).hess
    }

    /// `⟨∇Θ_pq(z), w⟩`; with `w = ω(a)/dτ_a` this is the directional
    /// derivative `D_a Θ_pq(z)`.
    pub fn dir_deriv(&self, z: &[C64], ch: &Characteristics, w: &[C64]) -> C64 {
        self.grad(z, ch).iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// `D_a D_b Θ_pq(z) = wᵀ H v`.
    pub fn dir_deriv2(&self, z: &[C64], ch: &Characteristics, w: &[C64], v: &[C64]) -> C64 {
        let h = self.hess(z, ch);
        let g = self.genus();
        let mut s = ZERO;
        for i in 0..g {
            for j in 0..g {
                s += w[i] * h[(i, j)] * v[j];
            }
        }
        s
    }

    /// Odd half-integer characteristic with the largest `‖∇Θ(0)‖`.
    pub fn find_odd_char(&self) -> Result<Characteristics> {
        let g = self.genus();
        let zero = vec![ZERO; g];
        let mut best: Option<(f64, Characteristics)> = None;
        for ch in odd_characteristics(g) {
            let jet = self.jet(&zero, &ch, 1);
            let gn = jet.grad.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if jet.value.norm() > 1e-10 * gn.max(1.0) {
                continue;
            }
            if best.as_ref().is_none_or(|(b, _)| gn > b * (1.0 + 1e-12)) {
                best = Some((gn, ch));
            }
        }
        match best {
            Some((gn, ch)) if gn > 1e-10 => Ok(ch),
            _ => Err(Error::NoNonSingularOddChar),
        }
    }

    /// Heat-equation residuals for the derivative `∂/∂B_αβ` of the series,
    /// taken by central differences with step `1e-5`. Off the diagonal the
    /// step is split between `B_αβ` and `B_βα` so `B` stays symmetric.
    pub fn heat_residual(&self, z: &[C64], ch: &Characteristics, alpha: usize, beta: usize) -> Result<HeatResidual> {
        let h = 1e-5;
        let shifted = |d: f64| -> Result<C64> {
            let mut b = self.b.clone();
            if alpha == beta {
                b[(alpha, beta)] += d;
            } else {
                b[(alpha, beta)] += 0.5 * d;
                b[(beta, alpha)] += 0.5 * d;
            }
            let ctx = ThetaContext { b, ..self.clone() };
            Ok(ctx.theta(z, ch))
        };
        let db = (shifted(h)? - shifted(-h)?) / (2.0 * h);
        let lhs = C64::new(0.0, 4.0 * PI) * db;
        let d2 = self.hess(z, ch)[(alpha, beta)];
        let scale = lhs.norm().max(d2.norm()).max(self.theta(z, ch).norm()).max(1e-300);
        let k1 = (lhs - d2).norm() / scale;
        let k2 = (lhs - 2.0 * d2).norm() / scale;
        let (kappa, residual) = if k1 <= k2 { (1.0, k1) } else { (2.0, k2) };
        Ok(HeatResidual {
            kappa1: k1,
            kappa2: k2,
            kappa,
            residual,
        })
    }
}
