//! Shared numeric kernels: adaptive quadrature, root finding, an
//! embedded Runge-Kutta integrator with dense output, elliptic
//! integrals, and the modified Bessel function of complex order.

pub mod bessel;
pub mod elliptic;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub use bessel::bessel_k;
pub use elliptic::elliptic_ke;
pub use ode::{ode_integrate, ode_integrate_with_stop, OdeOptions, OdePath};
pub use quadrature::{integrate, integrate_complex, integrate_split, Hint, Quadrature, Tol};
pub use roots::{find_root, scan_brackets, Bracket};
