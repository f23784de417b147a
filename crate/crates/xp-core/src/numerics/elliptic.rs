//! Complete elliptic integrals K(m) and E(m) in the parameter convention
//! m = k^2, evaluated with the arithmetic-geometric mean.
//!
//!   K(m) = int_0^{pi/2} (1 - m sin^2 t)^{-1/2} dt
//!   E(m) = int_0^{pi/2} (1 - m sin^2 t)^{ 1/2} dt

use crate::error::{Error, Result};

const MAX_ITER: usize = 40;

/// K(m) and E(m) for m in [0, 1). K diverges as m -> 1.
pub fn elliptic_ke(m: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("elliptic parameter must lie in [0, 1), got {m}")));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c2_sum = 0.5 * m; // 2^{n-1} c_n^2 accumulated from n = 0, c_0^2 = m
    let mut pow = 0.5;
    for _ in 0..MAX_ITER {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        c2_sum += pow * c * c;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    let k = std::f64::consts::FRAC_PI_2 / a;
    let e = k * (1.0 - c2_sum);
    Ok((k, e))
}
