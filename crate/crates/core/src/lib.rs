//! Theta-functional solutions of the stationary axisymmetric vacuum
//! Einstein equations.
//!
//! The crate builds hyperelliptic Riemann-surface data (branch cuts,
//! normalized holomorphic differentials, period matrices, Abel maps),
//! evaluates multidimensional theta functions with characteristics and
//! the prime-form quotients that enter the degenerate Fay identities,
//! and assembles from them the Ernst potential together with the metric
//! functions of the Weyl–Lewis–Papapetrou line element. The [`verify`]
//! module checks every identity the construction relies on numerically.

pub mod cli;
pub mod curve;
pub mod ernst;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod metric;
pub mod periods;
pub mod quad;
pub mod theta;
pub mod verify;

pub use curve::{ErnstCurve, HyperellipticCurve, Sheet, SurfacePoint};
pub use ernst::{ErnstSolution, ErnstValue};
pub use error::{Error, Result};
pub use kernels::KernelContext;
pub use metric::{MetricConstants, MetricValues};
pub use periods::{PeriodData, PeriodOptions};
pub use theta::{Characteristics, ThetaContext};

pub use num_complex::Complex64 as C64;
