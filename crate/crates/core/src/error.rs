use thiserror::Error;

/// Errors raised by curve construction, period computation and the
/// theta-functional machinery built on top of them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("branch points {0} and {1} coincide (separation below {2:e})")]
    DuplicateBranchPoint(usize, usize, f64),
    #[error("a hyperelliptic curve needs an even number (>= 4) of branch points, got {0}")]
    OddBranchCount(usize),
    /// Index of the offending branch-point pair or characteristic component.
    #[error("reality condition violated at index {0} (pairs need E = conj(F) or both real)")]
    RealityViolation(usize),
    #[error("point is on the symmetry axis (rho = {0} <= 0)")]
    OnAxis(f64),
    #[error("branch point of pair {0} collides with xi or conj(xi)")]
    BranchCollision(usize),
    #[error("branch cuts {0} and {1} intersect or touch")]
    CutsIntersect(usize, usize),
    #[error("a-period matrix is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("no admissible integration path from this point: {0}")]
    PathThroughBranchPoint(String),
    #[error("third-kind differential needs distinct poles")]
    CoincidingPoles,
    #[error("points must be distinct")]
    CoincidingPoints,
    #[error("pole lies on a branch cut encircled by an a-cycle")]
    PoleOnCycle,
    #[error("Im B is not positive definite (smallest eigenvalue {0:e})")]
    DivergentContext(f64),
    #[error("every odd half-integer characteristic has a vanishing gradient at 0")]
    NoNonSingularOddChar,
    #[error("prime-form quotient is singular (|theta_*| = {0:e})")]
    SingularPrimeForm(f64),
    #[error("theta divisor hit (|theta| = {0:e})")]
    ThetaDivisorHit(f64),
    #[error("theta_pq(0) vanishes: solution is singular here (|theta| = {0:e})")]
    SingularRegion(f64),
    #[error("configuration error: {0}")]
    ConfigParse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
