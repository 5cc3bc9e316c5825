//! Numerical geometry of labeled landmark configurations in `R^D` under
//! reproducing-kernel metrics.
//!
//! The metric on `N` landmarks is induced by a translation- and rotation-
//! invariant scalar kernel: the *cometric* (inverse metric) has entries
//! `K(q^a - q^b)` and is therefore cheap to differentiate, while the metric
//! itself is only available through a matrix inverse. Everything in this
//! crate works on the cometric side:
//!
//! * [`kernels`] — admissible radial kernels and their spatial derivatives.
//! * [`manifold`] — Gram matrices, index raising/lowering, analytic cometric
//!   partials, path energy, horizontal velocity fields.
//! * [`cometric`] — the generic cometric-model trait, finite-difference
//!   backing, and the built-in constant-curvature test models.
//! * [`curvature`] — sectional curvature from cometric data: the fast
//!   cometric-side formula and the classical Christoffel route used as an
//!   independent oracle.
//! * [`landmark_curvature`] — the landmark-specialized curvature terms
//!   (force, strain, compression, landmark derivative).
//! * [`geodesics`] — Hamiltonian geodesic shooting and passive advection.
//! * [`two_point`] — closed forms for geodesics and curvature when only two
//!   landmarks carry momentum.

pub mod cometric;
pub mod curvature;
pub mod error;
pub mod geodesics;
pub mod kernels;
pub mod landmark_curvature;
pub mod manifold;
pub mod sampling;
pub mod two_point;

pub use error::{Error, Result};
pub use kernels::{Kernel, MaternOrder, RadialKernel};
pub use manifold::{Covector, Landmarks, Smoothing, Tangent};
