//! Covariant xp models: classical dynamics, semiclassical state
//! counting, inverse spectral reconstruction, and quantum spectra for
//! Hamiltonians of the form H = U(x) p + V(x)/p on a half line.
//!
//! The crate is organized bottom up:
//!
//! * [`numerics`]: quadrature, roots, ODE, elliptic, Bessel kernels;
//! * [`models`]: the model catalog, gauge maps, curvature, light-cone
//!   charts;
//! * [`dynamics`]: classical trajectories, periods, geodesic checks;
//! * [`semiclassics`]: state counting and the two Abel inversions;
//! * [`quantum`]: self-adjoint spectra, eigenfunctions, scattering;
//! * [`riemann`]: comparison of spectra against tabulated zeta zeros.

pub mod dynamics;
pub mod error;
pub mod models;
pub mod numerics;
pub mod quantum;
pub mod riemann;
pub mod semiclassics;

pub use error::{Error, Result};
