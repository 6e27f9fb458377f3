//! Hyperelliptic curves `μ² = Π (λ - λ_m)` realized as two copies of the
//! λ-plane glued along `g + 1` straight branch cuts.
//!
//! On the `+` sheet `μ` is the product of one factor per cut,
//! `f_j(λ) = (λ - a_j) sqrt((λ - b_j)/(λ - a_j))`, each analytic off its own
//! segment `[a_j, b_j]` and asymptotic to `λ` at infinity, so
//! `μ/λ^{g+1} → +1` as `λ → ∞⁺`. Every integration path used by the crate
//! is a union of straight rays that never cross a cut, so no sheet
//! bookkeeping beyond this product is ever needed.
//!
//! Homology: the first cut is the base cut. `a_α` (α = 1..g) is the
//! counter-clockwise loop on the `+` sheet around cut `α`; `b_α` leaves the
//! lead endpoint of the base cut along the common ray direction `d` to
//! `∞⁺`, comes back along the parallel ray into the lead endpoint of cut `α`
//! and returns on the `−` sheet. These ray cycles meet pairwise near `∞±`;
//! [`HyperellipticCurve::homology`] counts the crossings from the ray offsets
//! and adds integer multiples of a-cycles to the b-cycles to make the basis
//! canonical.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sheet {
        match self {
            Sheet::Plus => Sheet::Minus,
            Sheet::Minus => Sheet::Plus,
        }
    }
}

/// A point on the two-sheeted cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfacePoint {
    Finite { lambda: C64, sheet: Sheet },
    Infinity(Sheet),
}

impl SurfacePoint {
    pub fn plus(lambda: C64) -> Self {
        SurfacePoint::Finite {
            lambda,
            sheet: Sheet::Plus,
        }
    }

    pub fn minus(lambda: C64) -> Self {
        SurfacePoint::Finite {
            lambda,
            sheet: Sheet::Minus,
        }
    }

    pub fn inf_plus() -> Self {
        SurfacePoint::Infinity(Sheet::Plus)
    }

    pub fn inf_minus() -> Self {
        SurfacePoint::Infinity(Sheet::Minus)
    }

    /// Hyperelliptic involution `(λ, μ) ↦ (λ, −μ)`.
    pub fn involution(self) -> Self {
        match self {
            SurfacePoint::Finite { lambda, sheet } => SurfacePoint::Finite {
                lambda,
                sheet: sheet.flip(),
            },
            SurfacePoint::Infinity(s) => SurfacePoint::Infinity(s.flip()),
        }
    }

    pub fn lambda(&self) -> Option<C64> {
        match self {
            SurfacePoint::Finite { lambda, .. } => Some(*lambda),
            SurfacePoint::Infinity(_) => None,
        }
    }
}

/// How a point sits on a particular curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointKind {
    Generic { lambda: C64, sheet: Sheet },
    Branch(usize),
    Infinity(Sheet),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub a: C64,
    pub b: C64,
}

impl Cut {
    pub fn new(a: C64, b: C64) -> Self {
        Cut { a, b }
    }

    /// `f(λ) = (λ - a) sqrt((λ - b)/(λ - a))`, the cut's share of `μ` on the
    /// `+` sheet.
    #[inline]
    pub fn factor(&self, lambda: C64) -> C64 {
        let da = lambda - self.a;
        if da == C64::new(0.0, 0.0) || lambda == self.b {
            return C64::new(0.0, 0.0);
        }
        da * ((lambda - self.b) / da).sqrt()
    }

    pub fn endpoint(&self, which: usize) -> C64 {
        if which == 0 {
            self.a
        } else {
            self.b
        }
    }
}

/// Description of the canonical cycles for a cut arrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologySpec {
    /// `a_α` encircles cut `α + 1` (cut 0 is the base cut).
    pub a_cuts: Vec<usize>,
    /// Branch-point index where the base half of every b-cycle starts.
    pub base_branch: usize,
    /// Branch-point index where `b_α` enters cut `α + 1`.
    pub b_endpoints: Vec<usize>,
    /// Common direction of every b-cycle ray.
    pub direction: C64,
    /// Intersection form of the ray cycles, block order `(a_1..a_g, b_1..b_g)`.
    pub raw_intersection: Vec<Vec<i32>>,
    /// `b_α = (ray cycle)_α + Σ_γ b_shift[α][γ] a_γ`.
    pub b_shift: Vec<Vec<i32>>,
    /// Intersection form of `(a, b)` after the shift.
    pub intersection: Vec<Vec<i32>>,
}

impl HomologySpec {
    pub fn is_canonical(&self) -> bool {
        let g = self.a_cuts.len();
        (0..2 * g).all(|i| {
            (0..2 * g).all(|j| {
                let expected = if i < g && j == i + g {
                    1
                } else if j < g && i == j + g {
                    -1
                } else {
                    0
                };
                self.intersection[i][j] == expected
            })
        })
    }
}

/// A hyperelliptic curve given by its branch cuts.
#[derive(Debug, Clone)]
pub struct HyperellipticCurve {
    cuts: Vec<Cut>,
    direction: C64,
    /// Index (0 or 1) of the lead endpoint of each cut with respect to `direction`.
    leads: Vec<usize>,
    /// Exit direction of the Abel-map ray and local-parameter branch at each branch point.
    exits: Vec<C64>,
    /// `S_m = lim μ/τ` at every branch point, `τ² = λ - λ_m`.
    branch_sqrt: Vec<C64>,
    delta_sep: f64,
    diameter: f64,
    /// Sum of the branch points; fixes the constant term of `λ^g dλ/μ` at infinity.
    branch_sum: C64,
}

pub(crate) fn seg_point_dist(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn ray_point_dist(p: C64, o: C64, u: C64) -> f64 {
    let t = ((p - o) * u.conj()).re / u.norm_sqr();
    if t <= 0.0 {
        (p - o).norm()
    } else {
        (p - (o + u * t)).norm()
    }
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn seg_seg_dist(p1: C64, p2: C64, q1: C64, q2: C64) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    [
        seg_point_dist(p1, q1, q2),
        seg_point_dist(p2, q1, q2),
        seg_point_dist(q1, p1, p2),
        seg_point_dist(q2, p1, p2),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

/// Distance between the ray `o + t u` (t ≥ 0) and segment `[a, b]`.
pub(crate) fn ray_seg_dist(o: C64, u: C64, a: C64, b: C64) -> f64 {
    let denom = cross(u, b - a);
    if denom.abs() > 1e-300 {
        let t = cross(a - o, b - a) / denom;
        let s = cross(a - o, u) / denom;
        if t >= 0.0 && (0.0..=1.0).contains(&s) {
            return 0.0;
        }
    }
    [ray_point_dist(a, o, u), ray_point_dist(b, o, u), seg_point_dist(o, a, b)]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Candidate ray directions in preference order: `d`, `−d`, then rotations
/// of `d` in steps of 15°.
fn candidate_directions(d: C64) -> Vec<C64> {
    let mut out = vec![d, -d];
    for k in 1..12 {
        let ang = k as f64 * PI / 12.0;
        out.push(d * C64::from_polar(1.0, ang));
        out.push(d * C64::from_polar(1.0, -ang));
    }
    out
}

impl HyperellipticCurve {
    /// Builds the curve from explicit cuts; cut 0 is the base cut and
    /// `direction` the common ray direction of the b-cycles.
    pub fn from_cuts(cuts: Vec<Cut>, direction: C64) -> Result<Self> {
        let n = 2 * cuts.len();
        if cuts.len() < 2 {
            return Err(Error::OddBranchCount(n));
        }
        let direction = direction / direction.norm();
        let pts: Vec<C64> = cuts.iter().flat_map(|c| [c.a, c.b]).collect();
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((pts[i] - pts[j]).norm());
            }
        }
        let delta_sep = 1e-8 * diameter.max(1e-300);
        for i in 0..n {
            for j in i + 1..n {
                if (pts[i] - pts[j]).norm() <= delta_sep {
                    return Err(Error::DuplicateBranchPoint(i, j, delta_sep));
                }
            }
        }
        for i in 0..cuts.len() {
            for j in i + 1..cuts.len() {
                if seg_seg_dist(cuts[i].a, cuts[i].b, cuts[j].a, cuts[j].b) <= delta_sep {
                    return Err(Error::CutsIntersect(i, j));
                }
            }
        }

        // lead endpoint: furthest along `direction`; ties broken by (Re, Im)
        let leads: Vec<usize> = cuts
            .iter()
            .map(|c| {
                let pa = (c.a * direction.conj()).re;
                let pb = (c.b * direction.conj()).re;
                let tie = 1e-12 * diameter.max(1.0);
                if (pa - pb).abs() <= tie {
                    if (c.a.re, c.a.im) <= (c.b.re, c.b.im) {
                        0
                    } else {
                        1
                    }
                } else if pa > pb {
                    0
                } else {
                    1
                }
            })
            .collect();

        let branch_sum = pts.iter().sum();
        let mut curve = HyperellipticCurve {
            cuts,
            direction,
            leads,
            exits: Vec::new(),
            branch_sqrt: Vec::new(),
            delta_sep,
            diameter,
            branch_sum,
        };

        let clearance_floor = 1e-6 * diameter;
        for (j, &lead) in curve.leads.iter().enumerate() {
            let e = curve.cuts[j].endpoint(lead);
            let c = curve.ray_clearance(e, direction, Some(j));
            if c <= clearance_floor {
                return Err(Error::PathThroughBranchPoint(format!(
                    "b-cycle ray from cut {j} passes within {c:e} of another cut"
                )));
            }
        }

        let mut exits = Vec::with_capacity(n);
        for m in 0..n {
            let (j, w) = (m / 2, m % 2);
            if w == curve.leads[j] {
                exits.push(direction);
            } else {
                exits.push(curve.choose_exit(curve.cuts[j].endpoint(w), Some(j))?);
            }
        }
        curve.exits = exits;
        curve.branch_sqrt = (0..n).map(|m| curve.compute_branch_sqrt(m)).collect();
        Ok(curve)
    }

    /// Builds a curve from an unordered branch set: points are sorted by
    /// (Re, Im) and consecutive points are joined by cuts. The b-cycle ray
    /// direction is the candidate with the widest clearance.
    pub fn from_branch_points(points: &[C64]) -> Result<Self> {
        let n = points.len();
        if n < 4 || n % 2 == 1 {
            return Err(Error::OddBranchCount(n));
        }
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((points[i] - points[j]).norm());
            }
        }
        let delta = 1e-8 * diameter.max(1e-300);
        for i in 0..n {
            for j in i + 1..n {
                if (points[i] - points[j]).norm() <= delta {
                    return Err(Error::DuplicateBranchPoint(i, j, delta));
                }
            }
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());
        let cuts: Vec<Cut> = sorted.chunks(2).map(|c| Cut::new(c[0], c[1])).collect();

        let mut best: Option<(f64, C64)> = None;
        for k in 0..72 {
            let d = C64::from_polar(1.0, -PI / 2.0 + k as f64 * PI / 36.0);
            let probe = HyperellipticCurve {
                cuts: cuts.clone(),
                direction: d,
                leads: Vec::new(),
                exits: Vec::new(),
                branch_sqrt: Vec::new(),
                delta_sep: delta,
                diameter,
                branch_sum: C64::new(0.0, 0.0),
            };
            let clearance = cuts
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let pa = (c.a * d.conj()).re;
                    let pb = (c.b * d.conj()).re;
                    let e = if pa >= pb { c.a } else { c.b };
                    let other = if pa >= pb { c.b } else { c.a };
                    // rays leaving almost along their own cut are poor choices
                    let along = ((e - other) / (e - other).norm() * d.conj()).re;
                    probe.ray_clearance(e, d, Some(j)).min(diameter * (1.0 + along))
                })
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(c, _)| clearance > c * (1.0 + 1e-9)) {
                best = Some((clearance, d));
            }
        }
        let (_, d) = best.unwrap();
        Self::from_cuts(cuts, d)
    }

    pub fn genus(&self) -> usize {
        self.cuts.len() - 1
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn direction(&self) -> C64 {
        self.direction
    }

    pub fn delta_sep(&self) -> f64 {
        self.delta_sep
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn branch_sum(&self) -> C64 {
        self.branch_sum
    }

    pub fn num_branch_points(&self) -> usize {
        2 * self.cuts.len()
    }

    /// Branch point `m`: cut `m / 2`, endpoint `m % 2`.
    pub fn branch(&self, m: usize) -> C64 {
        self.cuts[m / 2].endpoint(m % 2)
    }

    pub fn branch_points(&self) -> Vec<C64> {
        (0..self.num_branch_points()).map(|m| self.branch(m)).collect()
    }

    pub fn branch_point(&self, m: usize) -> SurfacePoint {
        SurfacePoint::plus(self.branch(m))
    }

    /// Base point of the Abel map: lead endpoint of the base cut.
    pub fn base_index(&self) -> usize {
        self.leads[0]
    }

    /// Branch point where `b_α` (0-based α) ends.
    pub fn b_endpoint_index(&self, alpha: usize) -> usize {
        2 * (alpha + 1) + self.leads[alpha + 1]
    }

    pub fn exit_direction(&self, m: usize) -> C64 {
        self.exits[m]
    }

    /// `S_m` with `S_m² = Π_{n≠m}(λ_m - λ_n)`, on the branch fixed by the
    /// exit ray: `μ(λ_m + u t) ≈ S_m sqrt(u) sqrt(t)` for small `t > 0`.
    pub fn branch_sqrt(&self, m: usize) -> C64 {
        self.branch_sqrt[m]
    }

    fn compute_branch_sqrt(&self, m: usize) -> C64 {
        let (j, w) = (m / 2, m % 2);
        let u = self.exits[m];
        let c = self.cuts[j];
        let own = if w == 0 {
            u.sqrt() * ((c.a - c.b) / u).sqrt()
        } else {
            (c.b - c.a) * (u / (c.b - c.a)).sqrt() / u.sqrt()
        };
        let e = self.branch(m);
        self.cuts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .fold(own, |acc, (_, ck)| acc * ck.factor(e))
    }

    /// `μ` on the `+` sheet.
    #[inline]
    pub fn mu_plus(&self, lambda: C64) -> C64 {
        self.cuts.iter().fold(C64::new(1.0, 0.0), |acc, c| acc * c.factor(lambda))
    }

    /// `μ₊(λ_m + δ)` with the own-cut factor formed from `δ` directly, which
    /// keeps full relative accuracy as `δ → 0`.
    #[inline]
    pub fn mu_plus_near_branch(&self, m: usize, delta: C64) -> C64 {
        let j = m / 2;
        let c = self.cuts[j];
        let lambda = self.branch(m) + delta;
        let own = if m.is_multiple_of(2) {
            delta * ((lambda - c.b) / delta).sqrt()
        } else {
            let da = lambda - c.a;
            da * (delta / da).sqrt()
        };
        own * self.mu_plus_without(lambda, j)
    }

    /// `μ` on the `+` sheet with the factor of cut `skip` removed.
    #[inline]
    pub fn mu_plus_without(&self, lambda: C64, skip: usize) -> C64 {
        self.cuts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .fold(C64::new(1.0, 0.0), |acc, (_, c)| acc * c.factor(lambda))
    }

    /// `μ` at a finite point (zero at branch points).
    pub fn mu(&self, p: &SurfacePoint) -> Result<C64> {
        match self.classify(p) {
            PointKind::Generic { lambda, sheet } => Ok(self.mu_plus(lambda) * sheet.sign()),
            PointKind::Branch(_) => Ok(C64::new(0.0, 0.0)),
            PointKind::Infinity(_) => Err(Error::InvalidInput("mu is infinite at infinity".into())),
        }
    }

    /// Index of the branch point at `lambda`, if any.
    pub fn branch_index(&self, lambda: C64) -> Option<usize> {
        let tol = 1e-13 * self.diameter.max(1.0);
        (0..self.num_branch_points()).find(|&m| (self.branch(m) - lambda).norm() <= tol)
    }

    pub fn classify(&self, p: &SurfacePoint) -> PointKind {
        match *p {
            SurfacePoint::Infinity(s) => PointKind::Infinity(s),
            SurfacePoint::Finite { lambda, sheet } => match self.branch_index(lambda) {
                Some(m) => PointKind::Branch(m),
                None => PointKind::Generic { lambda, sheet },
            },
        }
    }

    /// Smallest distance from the ray `o + t u` to any cut other than `skip`.
    pub fn ray_clearance(&self, o: C64, u: C64, skip: Option<usize>) -> f64 {
        self.cuts
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(_, c)| ray_seg_dist(o, u, c.a, c.b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Picks a ray direction from `origin` to infinity that keeps clear of
    /// all cuts. `own` names the cut `origin` is an endpoint of; the ray must
    /// then leave it at an angle of at least 60°.
    pub fn choose_exit(&self, origin: C64, own: Option<usize>) -> Result<C64> {
        let cands = candidate_directions(self.direction);
        let ok_angle = |u: C64| -> bool {
            match own {
                None => true,
                Some(j) => {
                    let c = self.cuts[j];
                    let other = if (c.a - origin).norm() < (c.b - origin).norm() { c.b } else { c.a };
                    let v = other - origin;
                    let cosang = (v * u.conj()).re / v.norm();
                    cosang < 0.5
                }
            }
        };
        let scored: Vec<(C64, f64)> = cands
            .iter()
            .filter(|u| ok_angle(**u))
            .map(|&u| (u, self.ray_clearance(origin, u, own)))
            .collect();
        let best = scored.iter().map(|(_, c)| *c).fold(0.0, f64::max);
        if best <= 1e-9 * self.diameter {
            return Err(Error::PathThroughBranchPoint(format!(
                "no ray from {origin} avoids the branch cuts"
            )));
        }
        Ok(scored.iter().find(|(_, c)| *c >= 0.25 * best).unwrap().0)
    }

    /// Distance from `lambda` to the nearest cut.
    pub fn distance_to_cuts(&self, lambda: C64) -> f64 {
        self.cuts
            .iter()
            .map(|c| seg_point_dist(lambda, c.a, c.b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `lambda` to the nearest branch point other than `skip`.
    pub fn distance_to_branch_points(&self, lambda: C64, skip: Option<usize>) -> f64 {
        (0..self.num_branch_points())
            .filter(|m| Some(*m) != skip)
            .map(|m| (self.branch(m) - lambda).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Canonical-cycle description with the intersection form derived from
    /// the cut/ray geometry: `a_α∘b_β` counts how often the `+`-sheet half of
    /// `b_β` enters the loop around cut `α`; two b-cycles can only meet where
    /// their rays cross, which parallel rays never do.
    pub fn homology(&self) -> HomologySpec {
        let g = self.genus();
        let base = self.base_index();
        let base_pt = self.branch(base);
        let d = self.direction;
        let mut x = vec![vec![0i32; 2 * g]; 2 * g];
        let floor = 1e-9 * self.diameter;
        for alpha in 0..g {
            let cut = alpha + 1;
            let c = self.cuts[cut];
            for beta in 0..g {
                let end = self.branch(self.b_endpoint_index(beta));
                let mut n = 0;
                if beta == alpha || ray_seg_dist(end, d, c.a, c.b) <= floor {
                    n += 1;
                }
                if ray_seg_dist(base_pt, d, c.a, c.b) <= floor {
                    n += 1;
                }
                x[alpha][g + beta] = n;
                x[g + beta][alpha] = -n;
            }
        }
        // All b-cycles share the base ray on both sheets and only separate at
        // ∞±, where parallel rays arrive tangentially and are ordered by their
        // transverse offset. Resolving the shared stretch gives one crossing
        // per pair, signed by the offset order and by whether the two leads lie
        // on the same side of the base ray.
        let offset = |z: C64| (z * d.conj()).im;
        let o0 = offset(base_pt);
        for alpha in 0..g {
            for beta in 0..g {
                if alpha == beta {
                    continue;
                }
                let oa = offset(self.branch(self.b_endpoint_index(alpha)));
                let ob = offset(self.branch(self.b_endpoint_index(beta)));
                let order = if ob > oa { 1 } else { -1 };
                let side = if (oa - o0) * (ob - o0) > 0.0 { -1 } else { 1 };
                x[g + alpha][g + beta] = order * side;
            }
        }
        // b'_α = b_α + Σ_γ M_αγ a_γ with M the upper triangle of −(b∘b)
        let shift: Vec<Vec<i32>> = (0..g)
            .map(|a| (0..g).map(|b| if b > a { -x[g + a][g + b] } else { 0 }).collect())
            .collect();
        let n = 2 * g;
        let t = |i: usize, j: usize| -> i32 {
            if i == j {
                1
            } else if i >= g && j < g {
                shift[i - g][j]
            } else {
                0
            }
        };
        let corrected: Vec<Vec<i32>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = 0;
                        for k in 0..n {
                            for l in 0..n {
                                acc += t(i, k) * x[k][l] * t(j, l);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        HomologySpec {
            a_cuts: (1..=g).collect(),
            base_branch: base,
            b_endpoints: (0..g).map(|a| self.b_endpoint_index(a)).collect(),
            direction: d,
            raw_intersection: x,
            b_shift: shift,
            intersection: corrected,
        }
    }

    /// Same cut arrangement with branch point `m` moved by `delta`.
    pub fn with_branch_shift(&self, m: usize, delta: C64) -> Result<Self> {
        let mut cuts = self.cuts.clone();
        let j = m / 2;
        if m.is_multiple_of(2) {
            cuts[j].a += delta;
        } else {
            cuts[j].b += delta;
        }
        Self::from_cuts(cuts, self.direction)
    }
}

/// The Ernst family `μ² = (λ - ξ)(λ - ξ̄) Π (λ - E_m)(λ - F_m)` with
/// `ξ = ζ - iρ`, `ρ > 0`.
///
/// Cut 0 is the vertical segment `[ξ, ξ̄]`, the remaining cuts are
/// `[E_m, F_m]`; b-cycle rays point in the `−i` direction, so `ξ` is the
/// base point, `∞±` are reached straight down from it and `ξ̄` straight up.
#[derive(Debug, Clone)]
pub struct ErnstCurve {
    xi: C64,
    pairs: Vec<(C64, C64)>,
    curve: HyperellipticCurve,
}

pub const XI_INDEX: usize = 0;
pub const XIBAR_INDEX: usize = 1;

impl ErnstCurve {
    pub fn new(xi: C64, pairs: &[(C64, C64)]) -> Result<Self> {
        let rho = -xi.im;
        if rho.is_nan() || rho <= 0.0 {
            return Err(Error::OnAxis(rho));
        }
        if pairs.is_empty() {
            return Err(Error::OddBranchCount(2));
        }
        let scale = pairs
            .iter()
            .flat_map(|(e, f)| [e.norm(), f.norm()])
            .fold(xi.norm(), f64::max)
            .max(1.0);
        let tol = 1e-12 * scale;
        for (m, &(e, f)) in pairs.iter().enumerate() {
            let conj_pair = (e - f.conj()).norm() <= tol;
            let real_pair = e.im.abs() <= tol && f.im.abs() <= tol;
            if !(conj_pair || real_pair) {
                return Err(Error::RealityViolation(m));
            }
            for b in [xi, xi.conj()] {
                if (e - b).norm() <= 1e-8 * scale || (f - b).norm() <= 1e-8 * scale {
                    return Err(Error::BranchCollision(m));
                }
            }
        }
        let mut cuts = vec![Cut::new(xi, xi.conj())];
        cuts.extend(pairs.iter().map(|&(e, f)| Cut::new(e, f)));
        let curve = HyperellipticCurve::from_cuts(cuts, C64::new(0.0, -1.0))?;
        Ok(ErnstCurve {
            xi,
            pairs: pairs.to_vec(),
            curve,
        })
    }

    /// Curve at the Weyl coordinates `(ρ, ζ)`.
    pub fn at(rho: f64, zeta: f64, pairs: &[(C64, C64)]) -> Result<Self> {
        Self::new(C64::new(zeta, -rho), pairs)
    }

    pub fn xi(&self) -> C64 {
        self.xi
    }

    pub fn rho(&self) -> f64 {
        -self.xi.im
    }

    pub fn zeta(&self) -> f64 {
        self.xi.re
    }

    pub fn pairs(&self) -> &[(C64, C64)] {
        &self.pairs
    }

    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    pub fn xi_point(&self) -> SurfacePoint {
        SurfacePoint::plus(self.xi)
    }

    pub fn xibar_point(&self) -> SurfacePoint {
        SurfacePoint::plus(self.xi.conj())
    }
}
