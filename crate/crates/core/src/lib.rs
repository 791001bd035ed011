//! Harmonic polynomials vanishing on quadratic cones.
//!
//! The crate is organised around five subsystems:
//!
//! * [`poly`]: exact homogeneous polynomial algebra, the map `r ↦ Δ(K_a·r)`
//!   whose corank is the dimension of the space of degree-`N` harmonic
//!   polynomials vanishing on the cone `C_a`, and the formal power-series
//!   recursion for perturbed operators.
//! * [`niven`]: Niven's equations, solved as convex minimisation on the
//!   ordered domains `D_m`, continuation along parameter curves `a(t)` and
//!   the endpoint asymptotics of that family.
//! * [`harmonics`]: conical harmonics `Q_{ε,m}`, conical coordinates and
//!   orthogonality on the sphere.
//! * [`legendre`]: associated Legendre polynomials, certified zero
//!   enclosures and the WKB approximation with explicit error bounds.
//! * [`diophantine`]: the Pell-type equation `p² − 32q² = −7` and the
//!   exclusion inequality that rules out its nontrivial solutions.
//!
//! [`verify`] bundles the end-to-end acceptance checks used by the test
//! suite and by `coneharm verify-all`.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diophantine;
pub mod error;
pub mod harmonics;
pub mod legendre;
pub mod niven;
pub mod poly;
pub mod real;
pub mod verify;

pub use error::{Error, Result};
pub use real::{Mp, Real};

pub use diophantine::{ExclusionCandidate, ExclusionReport, PellSolution};
pub use harmonics::{ConicHarmonic, ConicalCoords};
pub use legendre::{LegendreSpec, WkbFrame, ZeroEnclosure};
pub use niven::{CurveTrace, NivenProblem, NivenSolution, RationalCurve};
pub use poly::{ConeParams, HomogeneousPoly, LinearMapMatrix, Monomial};
