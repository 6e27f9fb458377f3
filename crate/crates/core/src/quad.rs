//! Adaptive composite Gauss–Legendre quadrature for vector-valued complex
//! integrands.
//!
//! A panel is accepted once its single-rule estimate agrees with the sum of
//! the two half-panel estimates to within `rel_tol` times the L1 scale of the
//! integrand (measured on the first pass). Endpoint singularities must be
//! removed by the caller through a change of variables; the rule never
//! evaluates the integrand at the interval ends.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::C64;

const MAX_PANELS: usize = 40_000;
const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone)]
pub struct Quadrature {
    nodes: Vec<(f64, f64)>,
    rel_tol: f64,
}

impl Quadrature {
    pub fn new(order: usize, rel_tol: f64) -> Self {
        let order = NonZeroUsize::new(order.max(2)).unwrap();
        let rule = GaussLegendre::new(order);
        let nodes = rule.as_node_weight_pairs().to_vec();
        Quadrature { nodes, rel_tol }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    fn panel<F>(&self, n: usize, a: f64, b: f64, f: &mut F, buf: &mut [C64], out: &mut [C64]) -> f64
    where
        F: FnMut(f64, &mut [C64]),
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let mut l1 = 0.0;
        for &(x, w) in &self.nodes {
            f(mid + half * x, buf);
            for k in 0..n {
                out[k] += buf[k] * (w * half);
                l1 += w * half.abs() * buf[k].norm();
            }
        }
        l1
    }

    /// Integrates `f` over `[a, b]`; `f(s, out)` writes the `n` integrand
    /// components at parameter `s`.
    pub fn integrate<F>(&self, n: usize, a: f64, b: f64, mut f: F) -> Result<Vec<C64>>
    where
        F: FnMut(f64, &mut [C64]),
    {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let mut whole = vec![C64::new(0.0, 0.0); n];
        let scale = self.panel(n, a, b, &mut f, &mut buf, &mut whole).max(f64::MIN_POSITIVE);
        let tol = self.rel_tol * scale;

        let mut total = vec![C64::new(0.0, 0.0); n];
        let mut stack = vec![(a, b, whole, 0u32)];
        let mut left = vec![C64::new(0.0, 0.0); n];
        let mut right = vec![C64::new(0.0, 0.0); n];
        let mut panels = 0usize;
        while let Some((lo, hi, est, depth)) = stack.pop() {
            let m = 0.5 * (lo + hi);
            self.panel(n, lo, m, &mut f, &mut buf, &mut left);
            self.panel(n, m, hi, &mut f, &mut buf, &mut right);
            let err = (0..n).map(|k| (left[k] + right[k] - est[k]).norm()).fold(0.0, f64::max);
            panels += 1;
            if !err.is_finite() {
                return Err(Error::NoConvergence(format!("non-finite integrand on [{lo}, {hi}]")));
            }
            if err <= tol {
                for k in 0..n {
                    total[k] += left[k] + right[k];
                }
            } else if depth >= MAX_DEPTH || panels > MAX_PANELS {
                return Err(Error::NoConvergence(format!(
                    "panel [{lo:.3e}, {hi:.3e}] error {err:.3e} above {tol:.3e}"
                )));
            } else {
                stack.push((m, hi, right.clone(), depth + 1));
                stack.push((lo, m, left.clone(), depth + 1));
            }
        }
        Ok(total)
    }
}
