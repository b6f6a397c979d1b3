//! Numerical counter-example separating k-intersection bodies from
//! k-Busemann-Petty bodies.
//!
//! Everything here works with functions of revolution on the sphere and on
//! the Grassmannian, reduced to a single variable on `[0, 1]`:
//! `t = |<xi, xi0>|` for directions and `s = cos angle(xi0, E)` for subspaces.
//!
//! * [`specfun`]: log-gamma, Beta, incomplete Beta and the closed-form
//!   normalization constants of the reduced transforms.
//! * [`profiles`]: continuous profile functions on `[0, 1]`.
//! * [`quadrature`] and [`transforms`]: Gauss-Legendre engine, the forward,
//!   dual and perp-dual transforms, the Grassmannian pairing and the duality
//!   self-test.
//! * [`construct`]: the bump profile `g` with `g(s0) = -1` whose two dual
//!   transforms stay `>= 1`, plus grid verification of those claims.
//! * [`certify`]: a non-negative Bernstein witness in the range of the
//!   forward transform that pairs negatively with `g`, its preimage, and the
//!   radial profile of the resulting body.

pub mod certify;
pub mod construct;
mod error;
pub mod output;
pub mod profiles;
pub mod quadrature;
pub mod selftest;
pub mod specfun;
pub mod transforms;

pub use certify::{body_profile, make_certificate, moment_scan, preimage, Certificate};
pub use construct::{
    build_g, gamma_sup, verify_all_m, verify_claims, window_deltas, BumpVariant, ConstructionParams, ConstructionResult,
};
pub use error::{Error, Result};
pub use profiles::{PolynomialCoeffs, RadialProfile, Transition};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use specfun::{ConstantsTable, DimPair};
pub use transforms::{dual, duality_check, forward, pairing, perp_dual, TransformSpec};
