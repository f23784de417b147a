//! Trajectories as geodesics of the model spacetime.
//!
//! In the identity chart the null coordinate x+ equals t, its affine
//! velocity along the worldline is sigma = dx+/ds = |p| / (2 w), and the
//! geodesic equation reads
//!     d^2 x+ / ds^2 + 2 w'(x) (dx+/ds)^2 = 0,
//! equivalently sigma sigma_dot + 2 w' sigma^2 = 0 with sigma_dot the
//! coordinate-time derivative.  The residual check below rebuilds
//! sigma_dot by finite differences so the balance is probed with data
//! the analytic relation never saw.

use crate::error::{Error, Result};
use crate::models::lightcone::LightconeChart;
use crate::models::{ModelSpec, XpModel};

use super::orbit::Trajectory;

/// Map trajectory samples into a chart's null coordinates.
pub fn worldline(chart: &LightconeChart, traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    traj.ts
        .iter()
        .zip(&traj.xs)
        .map(|(t, x)| chart.from_spacetime(*t, *x))
        .collect()
}

/// Coefficients (a+, a-, rhs) of the straight segment
/// a+ x+ + a- x- = rhs that a linear-model orbit of energy E traces in
/// the flat chart.  `t0` is the segment's reference time, where
/// x(t0) = |p(t0)|; successive bounces advance it by one period, which
/// scales the slope parameter q = e^{2 t0} h^{1/alpha} by e^{2 T_E}.
pub fn lightcone_worldline(model: &XpModel, e: f64, t0: f64) -> Result<(f64, f64, f64)> {
    let (alpha, h) = match model.spec() {
        ModelSpec::Linear { alpha, h } => (*alpha, *h),
        _ => {
            return Err(Error::Domain(format!(
                "worldline coefficients exist only for the linear kind, not '{}'",
                model.kind_name()
            )))
        }
    };
    let w0 = alpha * h;
    if e <= 2.0 * w0 {
        return Err(Error::NoOrbit { energy: e, threshold: 2.0 * w0 });
    }
    // q^alpha and its reciprocal; the line is steeper the later the segment.
    let qa = (2.0 * alpha * t0).exp() * h;
    Ok((1.0 / qa, qa, e / w0))
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicCheck {
    /// Largest residual of the geodesic balance, normalized by sigma^2.
    pub max_residual: f64,
    pub samples_used: usize,
    /// Nodes skipped because they sit too close to a turning point.
    pub samples_skipped: usize,
}

/// Verify the identity-chart geodesic equation along a trajectory.
///
/// Nodes with |xdot / w| >= 0.99 sit too close to a turning point for
/// the finite-difference stencil to resolve sigma_dot; they are skipped
/// and counted in `samples_skipped`.  Samples adjacent to wall bounces
/// are likewise excluded: the momentum jump there is a boundary
/// condition, not part of the smooth geodesic.
pub fn geodesic_residual(model: &XpModel, traj: &Trajectory) -> Result<GeodesicCheck> {
    let n = traj.ts.len();
    if n < 7 {
        return Err(Error::Domain("geodesic check needs at least seven samples".into()));
    }
    let dt = traj.ts[1] - traj.ts[0];
    let sigma: Vec<f64> = traj
        .xs
        .iter()
        .zip(&traj.ps)
        .map(|(x, p)| {
            let w = model.w(*x).unwrap_or(f64::NAN);
            p.abs() / (2.0 * w)
        })
        .collect();
    // The five-point stencil spans i-2..=i+2, so a node is usable only
    // when that whole window is finite and clear of bounces.
    let near_bounce = |t: f64| traj.bounces.iter().any(|b| (t - b).abs() < 5.5 * dt);
    let mut worst = 0.0f64;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for i in 2..n - 2 {
        if (i - 2..=i + 2).any(|j| near_bounce(traj.ts[j]) || !sigma[j].is_finite()) {
            continue;
        }
        let x = traj.xs[i];
        let p = traj.ps[i];
        let xdot = model.u2(x)? - model.v2(x)? / (p * p);
        if (xdot / model.w(x)?).abs() >= 0.99 {
            skipped += 1;
            continue;
        }
        let sigma_dot = (-sigma[i + 2] + 8.0 * sigma[i + 1] - 8.0 * sigma[i - 1]
            + sigma[i - 2])
            / (12.0 * dt);
        let wp = model.w_prime(x)?;
        let residual = sigma[i] * sigma_dot + 2.0 * wp * sigma[i] * sigma[i];
        worst = worst.max(residual.abs() / (sigma[i] * sigma[i]));
        used += 1;
    }
    if used == 0 {
        return Err(Error::Domain("no usable samples away from bounces".into()));
    }
    Ok(GeodesicCheck { max_residual: worst, samples_used: used, samples_skipped: skipped })
}

/// Fit x- = a + b x+ through a slice of worldline points and return
/// (a, b, max normalized deviation).
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Domain("line fit needs at least three points".into()));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::Domain("degenerate abscissae in line fit".into()));
    }
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    let spread = points.iter().map(|(_, y)| *y).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|(_, y)| *y).fold(f64::INFINITY, f64::min);
    let mut dev = 0.0f64;
    for (x, y) in points {
        dev = dev.max((y - a - b * x).abs());
    }
    Ok((a, b, dev / spread.max(1e-300)))
}
