//! Modified Bessel function K_nu(z) for complex order and positive real
//! argument, through the contour-shifted integral representation
//!
//!   K_nu(z) = (1/2) int_{-inf}^{inf} exp(-z cosh s + nu s) ds .
//!
//! The integration line Im s = y0 is moved toward the saddle of the exponent:
//! directly onto it while |Im nu| <= z, and to pi/2 - O(1/|Im nu|) beyond,
//! where the line is kept clear of the oscillatory limit at pi/2. This makes
//! the prefactor exp(-|Im nu| |y0|) explicit in every sample, so the result
//! retains 12+ digits in f64 even when K is exponentially small; the residual
//! sample-to-result cancellation stays below ~10^3 for |Im nu| <= 150.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_complex, Hint, Quadrature, Tol};

/// Largest |Re nu| accepted; the applications only need orders within a unit
/// strip of the imaginary axis.
pub const MAX_RE_ORDER: f64 = 2.0;

/// K_nu(z) for complex nu with |Re nu| <= 2 and z > 0.
pub fn bessel_k(nu: Complex64, z: f64, tol: Tol) -> Result<Complex64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires z > 0, got {z}")));
    }
    if !(nu.re.abs() <= MAX_RE_ORDER) || !nu.im.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_k requires |Re nu| <= {MAX_RE_ORDER} and finite Im nu, got {nu}"
        )));
    }
    // Conjugation symmetry K_{conj nu}(z) = conj K_nu(z) holds exactly at the
    // algorithm level: orders in the upper half plane reuse the lower-half
    // evaluation.
    if nu.im > 0.0 {
        return Ok(bessel_k_lower(nu.conj(), z, tol)?.conj());
    }
    bessel_k_lower(nu, z, tol)
}

fn contour_height(tau_abs: f64, z: f64) -> f64 {
    if tau_abs == 0.0 {
        return 0.0;
    }
    let cap = std::f64::consts::FRAC_PI_2 - (6.0 / tau_abs).min(0.7);
    let saddle = (tau_abs / z).min(1.0).asin();
    saddle.min(cap).max(0.0)
}

fn bessel_k_lower(nu: Complex64, z: f64, tol: Tol) -> Result<Complex64> {
    let (sigma, tau) = (nu.re, nu.im);
    debug_assert!(tau <= 0.0);
    let y0 = -contour_height(-tau, z);
    let (cos_y0, sin_y0) = (y0.cos(), y0.sin());
    let envelope = z * cos_y0;
    // Truncate where the envelope has dropped by e^{-threshold} from its peak.
    let threshold = 45.0 + (1.0 / tol.rel.max(1e-16)).ln().max(0.0);
    let mut x_max = 1.0f64;
    while envelope * (x_max.cosh() - 1.0) - sigma.abs() * x_max < threshold {
        x_max += 0.5;
    }
    let line = |x: f64| {
        // exp(-z cosh(x + i y0) + nu (x + i y0)), expanded into real parts.
        let re = -z * x.cosh() * cos_y0 + sigma * x - tau * y0;
        let im = -z * x.sinh() * sin_y0 + sigma * y0 + tau * x;
        Complex64::from_polar(re.exp(), im)
    };
    let quad: Quadrature<Complex64> = integrate_complex(
        line,
        -x_max,
        x_max,
        Tol { abs: 0.0, rel: tol.rel.min(1e-10) },
        Hint::None,
    )?;
    Ok(0.5 * quad.value)
}
