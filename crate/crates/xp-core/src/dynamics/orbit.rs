//! Orbit integration with wall bounces.
//!
//! Hamilton's equations for H = U p + V/p are
//!     dx/dt = U - V/p^2,    dp/dt = -(U' p + V'/p).
//! When the trajectory reaches the wall the momentum jumps between the
//! two branches, p -> V/(U p), and the motion re-enters the domain.
//! Bounce instants are located on the integrator's dense output.

use crate::dynamics::turning_points;
use crate::error::{Error, Result};
use crate::models::XpModel;
use crate::numerics::ode::{ode_integrate_with_stop, OdeOptions, OdePath};

#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions {
    /// Integration window [0, t_span].
    pub t_span: f64,
    /// Number of uniform output samples.
    pub samples: usize,
    /// Starting state; defaults to the upper turning point with p = 1
    /// (p = -1 for E < 0).
    pub start: Option<(f64, f64)>,
    pub ode_tol: f64,
}

impl OrbitOptions {
    pub fn span(t_span: f64) -> Self {
        OrbitOptions { t_span, samples: 600, start: None, ode_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Trajectory {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Wall bounce instants, in order.
    pub bounces: Vec<f64>,
    /// Largest |H(x, p) - E| seen at integration nodes.
    pub energy_drift: f64,
}

/// Evaluate U, V and their slopes with a linear extension just below the
/// wall, so that a step probing past the wall stays finite while the
/// bounce instant is being located.
struct ExtendedField {
    model: XpModel,
    base: f64,
    u_b: f64,
    v_b: f64,
    du_b: f64,
    dv_b: f64,
}

impl ExtendedField {
    fn new(model: &XpModel) -> Result<ExtendedField> {
        let wall = model.wall();
        let base = if wall > 0.0 { wall } else { 1e-12 };
        Ok(ExtendedField {
            model: model.clone(),
            base,
            u_b: model.u2(base)?,
            v_b: model.v2(base)?,
            du_b: model.u2_prime(base)?,
            dv_b: model.v2_prime(base)?,
        })
    }

    fn eval(&self, x: f64) -> (f64, f64, f64, f64) {
        if x >= self.base {
            if let (Ok(u), Ok(v), Ok(du), Ok(dv)) = (
                self.model.u2(x),
                self.model.v2(x),
                self.model.u2_prime(x),
                self.model.v2_prime(x),
            ) {
                return (u, v, du, dv);
            }
        }
        let d = x - self.base;
        // Keep the extension positive; the trajectory only visits this
        // region transiently inside the bounce-locating step.
        let floor_u = 0.5 * self.u_b;
        let floor_v = 0.5 * self.v_b;
        (
            (self.u_b + self.du_b * d).max(floor_u),
            (self.v_b + self.dv_b * d).max(floor_v),
            self.du_b,
            self.dv_b,
        )
    }
}

/// Integrate the orbit at energy E over [0, t_span], bouncing off the
/// wall as needed, and return uniform samples of (x, p).
pub fn integrate_orbit(model: &XpModel, e: f64, opts: OrbitOptions) -> Result<Trajectory> {
    if !(opts.t_span > 0.0) || opts.samples < 2 {
        return Err(Error::Domain(
            "orbit integration needs a positive span and at least two samples".into(),
        ));
    }
    let field = ExtendedField::new(model)?;
    let wall = model.wall();
    let start = match opts.start {
        Some(s) => s,
        None => {
            let tp = turning_points(model, e)?;
            (tp.upper, e.signum())
        }
    };
    let h0 = model.u2(start.0.max(field.base))?;
    let expected_e = {
        let (x0, p0) = start;
        let (u, v, _, _) = field.eval(x0);
        u * p0 + v / p0
    };
    if (expected_e - e).abs() > 1e-6 * (1.0 + e.abs()) {
        return Err(Error::Domain(format!(
            "starting state carries H = {expected_e}, not the requested E = {e}"
        )));
    }
    let rhs = |_t: f64, y: &[f64; 2]| -> [f64; 2] {
        let (u, v, du, dv) = field.eval(y[0]);
        [u - v / (y[1] * y[1]), -(du * y[1] + dv / y[1])]
    };
    let stop = |_t: f64, y: &[f64; 2]| y[0] - wall;

    let mut segments: Vec<OdePath<2>> = Vec::new();
    let mut bounces = Vec::new();
    let mut drift = 0.0f64;
    let mut t0 = 0.0;
    let mut y = [start.0, start.1];
    let ode_opts = OdeOptions {
        tol: opts.ode_tol,
        h_init: Some((0.01 / h0.max(1e-6)).min(opts.t_span / 10.0)),
        ..OdeOptions::default()
    };
    loop {
        let (path, fired) =
            ode_integrate_with_stop(rhs, y, t0, opts.t_span, ode_opts, stop)?;
        for (ts, ys) in path.ts.iter().zip(&path.ys) {
            if ys[0] >= wall {
                let (u, v, _, _) = field.eval(ys[0]);
                drift = drift.max((u * ys[1] + v / ys[1] - e).abs());
            }
            let _ = ts;
        }
        let (t_end, y_end) = path.last();
        segments.push(path);
        if !fired {
            break;
        }
        if bounces.len() > 100_000 {
            return Err(Error::Divergent("unreasonable number of wall bounces".into()));
        }
        bounces.push(t_end);
        let (u, v, _, _) = field.eval(wall.max(field.base));
        y = [wall.max(field.base), v / (u * y_end[1])];
        t0 = t_end;
    }

    let mut ts = Vec::with_capacity(opts.samples);
    let mut xs = Vec::with_capacity(opts.samples);
    let mut ps = Vec::with_capacity(opts.samples);
    let mut seg = 0usize;
    for i in 0..opts.samples {
        let t = opts.t_span * i as f64 / (opts.samples - 1) as f64;
        while seg + 1 < segments.len() && t > segments[seg].last().0 {
            seg += 1;
        }
        let yk = segments[seg].sample(t);
        ts.push(t);
        xs.push(yk[0].max(wall));
        ps.push(yk[1]);
    }
    Ok(Trajectory { ts, xs, ps, bounces, energy_drift: drift })
}

/// Convenience: integrate a whole number of periods.
pub fn integrate_orbit_periods(
    model: &XpModel,
    e: f64,
    periods: f64,
    samples_per_period: usize,
) -> Result<Trajectory> {
    let t = crate::dynamics::period(model, e)?;
    let opts = OrbitOptions {
        t_span: periods * t,
        samples: ((periods * samples_per_period as f64).ceil() as usize).max(2),
        start: None,
        ode_tol: 1e-10,
    };
    integrate_orbit(model, e, opts)
}

/// Worst relative distance of sampled states from the energy shell
/// H(x, p) = E.  Staying on the shell is equivalent to p tracking one of
/// the two momentum branches, but is numerically well conditioned even
/// at turning points where the branches meet with infinite slope.
pub fn branch_residual(model: &XpModel, traj: &Trajectory, e: f64) -> f64 {
    let mut worst = 0.0f64;
    for (x, p) in traj.xs.iter().zip(&traj.ps) {
        let u = model.u2(*x).unwrap_or(f64::NAN);
        let v = model.v2(*x).unwrap_or(f64::NAN);
        let h = u * p + v / p;
        worst = worst.max((h - e).abs() / (1.0 + e.abs()));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{period, period_linear};
    use crate::models::{make_model, ModelSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn linear_orbit_matches_closed_form_until_first_bounce() {
        let (alpha, h, e) = (1.0, 1.0, 6.0);
        let m = make_model(ModelSpec::Linear { alpha, h }, 1.0).unwrap();
        let t_period = period_linear(alpha, alpha * h, e);
        let traj = integrate_orbit(&m, e, OrbitOptions::span(0.9 * t_period)).unwrap();
        assert_eq!(traj.bounces.len(), 1);
        // From the start (x_M, 1): p^2 = 2 exp(-2 alpha t) - 1 and
        // x = E p exp(2 alpha t) / (2 alpha) up to the bounce.
        let t_b = traj.bounces[0];
        for (i, t) in traj.ts.iter().enumerate() {
            if *t >= t_b - 1e-3 {
                continue;
            }
            let p2 = 2.0 * (-2.0 * alpha * t).exp() - 1.0;
            assert!(p2 > 0.0);
            let p = p2.sqrt();
            let x = e * p * (2.0 * alpha * t).exp() / (2.0 * alpha);
            assert!(close(traj.ps[i], p, 1e-8), "p at t = {t}");
            assert!(close(traj.xs[i], x, 1e-8), "x at t = {t}");
        }
        assert!(traj.energy_drift < 1e-8);
    }

    #[test]
    fn bounce_spacing_equals_the_period() {
        let (alpha, h, e) = (0.8, 0.6, 9.0);
        let m = make_model(ModelSpec::Linear { alpha, h }, 1.0).unwrap();
        let t = period_linear(alpha, alpha * h, e);
        let traj = integrate_orbit(&m, e, OrbitOptions::span(2.5 * t)).unwrap();
        // Starting from the top of flight, the first bounce lands before
        // half a period, so a 2.5 T span holds three of them.
        assert_eq!(traj.bounces.len(), 3);
        for pair in traj.bounces.windows(2) {
            assert!(
                (pair[1] - pair[0] - t).abs() < 1e-9,
                "spacing {} vs period {t}",
                pair[1] - pair[0]
            );
        }
    }

    #[test]
    fn berry_keating_orbit_never_bounces_and_closes() {
        let (h, e) = (1.0, 7.0);
        let m = make_model(ModelSpec::BerryKeating { h }, 1.0).unwrap();
        let t = period(&m, e).unwrap();
        let traj = integrate_orbit(&m, e, OrbitOptions::span(t)).unwrap();
        assert!(traj.bounces.is_empty());
        // The loop closes: final state equals the initial one.
        let n = traj.ts.len();
        assert!(close(traj.xs[n - 1], traj.xs[0], 1e-7));
        assert!(close(traj.ps[n - 1], traj.ps[0], 1e-7));
        assert!(traj.energy_drift < 1e-8);
        // p stays positive through both smooth turns.
        assert!(traj.ps.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn sampled_states_sit_on_a_momentum_branch() {
        let m = make_model(ModelSpec::BerryKeating { h: 1.0 }, 1.0).unwrap();
        let e = 9.0;
        let t = period(&m, e).unwrap();
        let traj = integrate_orbit(&m, e, OrbitOptions::span(2.0 * t)).unwrap();
        assert!(branch_residual(&m, &traj, e) < 1e-8);
    }

    #[test]
    fn orbit_orientation_follows_the_energy_sign() {
        // Positive energy circulates clockwise in (x, p): the loop
        // integral of p dx comes out positive, and mirrors for E < 0.
        let m = make_model(ModelSpec::BerryKeating { h: 1.0 }, 1.0).unwrap();
        for e in [7.0, -7.0] {
            let t = period(&m, e).unwrap();
            let traj = integrate_orbit(&m, e, OrbitOptions::span(t)).unwrap();
            let mut area = 0.0;
            for i in 0..traj.ts.len() - 1 {
                area += 0.5 * (traj.ps[i] + traj.ps[i + 1]) * (traj.xs[i + 1] - traj.xs[i]);
            }
            assert!(
                area.signum() == e.signum() && area.abs() > 1.0,
                "E = {e}: loop area {area}"
            );
        }
    }

    #[test]
    fn orbit_repeats_after_one_period() {
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: 1.0 }, 1.0).unwrap();
        let e = 6.0;
        let t = period(&m, e).unwrap();
        // 2001 samples over 2 T put t and t + T exactly one half-array apart.
        let opts = OrbitOptions { samples: 2001, ..OrbitOptions::span(2.0 * t) };
        let traj = integrate_orbit(&m, e, opts).unwrap();
        let x_m = e / 2.0;
        for i in 0..1000 {
            let d = (traj.xs[i + 1000] - traj.xs[i]).abs();
            assert!(d <= 1e-5 * x_m, "x({}) drifted by {d}", traj.ts[i]);
        }
    }

    #[test]
    fn bounce_rule_preserves_energy_exactly() {
        // Symmetric gauge: p -> 1/p leaves w (p + 1/p) bit-identical.
        let m = make_model(ModelSpec::Linear { alpha: 0.9, h: 1.2 }, 1.0).unwrap();
        let (x, e) = (1.2, 7.3);
        let (_, p_slow) = crate::dynamics::momentum_branches(&m, e, x).unwrap();
        let w = m.w(x).unwrap();
        let before = w * (p_slow + 1.0 / p_slow);
        let after = w * (1.0 / p_slow + p_slow);
        assert_eq!(before, after);
        // Generic gauge: p -> V/(U p) swaps the two terms of U p + V/p,
        // exact up to one rounding of the quotient.
        let g = make_model(ModelSpec::ModelIii { lx: 1.0, lp: 2.0 }, 1.0).unwrap();
        let (x, e) = (3.0, 14.0);
        let (_, p_slow) = crate::dynamics::momentum_branches(&g, e, x).unwrap();
        let (u, v) = (g.u2(x).unwrap(), g.v2(x).unwrap());
        let p_new = v / (u * p_slow);
        let before = u * p_slow + v / p_slow;
        let after = u * p_new + v / p_new;
        assert!((after - before).abs() <= 4.0 * f64::EPSILON * before.abs());
    }

    #[test]
    fn constant_profile_runs_straight_and_bounces_once() {
        let c = 1.0;
        let m = make_model(ModelSpec::Constant { c }, 1.0).unwrap();
        // Inward branch from x = 3 at E = 2.5: p = slow branch < 1 moves left.
        let e = 2.5f64;
        let p_slow = (e - (e * e - 4.0).sqrt()) / 2.0;
        let opts = OrbitOptions { start: Some((3.0, p_slow)), ..OrbitOptions::span(8.0) };
        let traj = integrate_orbit(&m, e, opts).unwrap();
        assert_eq!(traj.bounces.len(), 1);
        // Velocity before the bounce is c (1 - 1/p^2), after it flips sign.
        let v_in = c * (1.0 - 1.0 / (p_slow * p_slow));
        assert!(close(traj.bounces[0], 3.0 / v_in.abs(), 1e-8));
        let (x_last, p_last) = (*traj.xs.last().unwrap(), *traj.ps.last().unwrap());
        assert!(close(p_last, 1.0 / p_slow, 1e-8));
        assert!(x_last > 1.0);
        assert!(traj.energy_drift < 1e-9);
    }

    #[test]
    fn negative_energy_orbit_mirrors_positive_one() {
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: 1.0 }, 1.0).unwrap();
        let e = 6.0;
        let t = period(&m, e).unwrap();
        let pos = integrate_orbit(&m, e, OrbitOptions::span(0.8 * t)).unwrap();
        let neg = integrate_orbit(&m, -e, OrbitOptions::span(0.8 * t)).unwrap();
        for i in 0..pos.ts.len() {
            assert!(close(neg.xs[i], pos.xs[i], 1e-8));
            assert!(close(neg.ps[i], -pos.ps[i], 1e-8));
        }
    }

    #[test]
    fn wrong_start_energy_is_rejected() {
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: 1.0 }, 1.0).unwrap();
        let opts = OrbitOptions { start: Some((2.0, 1.0)), ..OrbitOptions::span(1.0) };
        assert!(integrate_orbit(&m, 17.0, opts).is_err());
    }
}
