//! Classical dynamics of H = U(x) p + V(x)/p.
//!
//! Fixing H = E gives two momentum branches whose product is V/U; in
//! the symmetric gauge they are reciprocal.  Bounded motion shuttles
//! between turning points where E^2 = 4 U V, either smoothly (when the
//! profile minimum is interior) or by a wall bounce p -> V/(U p).

use crate::error::{Error, Result};
use crate::models::XpModel;
use crate::numerics::quadrature::{integrate_split, Hint, Tol};
use crate::numerics::roots::{find_root, Bracket};

pub mod geodesic;
pub mod orbit;

pub use orbit::{integrate_orbit, OrbitOptions, Trajectory};

/// Both momentum branches at (x, E): the solutions of U p^2 - E p + V = 0,
/// returned as (fast, slow) where fast is the larger-magnitude root and
/// fast * slow = V/U.
pub fn momentum_branches(model: &XpModel, e: f64, x: f64) -> Result<(f64, f64)> {
    let u = model.u2(x)?;
    let v = model.v2(x)?;
    let disc = e * e - 4.0 * u * v;
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "point x = {x} is classically forbidden at E = {e} (E^2 < 4 U V)"
        )));
    }
    // Evaluate the larger-magnitude root first, then divide, to avoid the
    // cancellation in the small root.
    let big = (e + e.signum() * disc.sqrt()) / (2.0 * u);
    let small = v / (u * big);
    Ok((big, small))
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TurningPoints {
    pub lower: f64,
    pub upper: f64,
    /// True when the lower turning point is a smooth zero of E^2 - 4 U V,
    /// false when it is the hard wall.
    pub smooth_lower: bool,
}

fn classical_band(model: &XpModel, e: f64) -> Result<f64> {
    let wm = model.w_min();
    let threshold = 2.0 * wm.value;
    if e.abs() <= threshold {
        return Err(Error::NoOrbit { energy: e, threshold });
    }
    Ok(e.abs())
}

/// Turning points of the bounded orbit at energy E.  Constant profiles
/// have open trajectories and are rejected.
pub fn turning_points(model: &XpModel, e: f64) -> Result<TurningPoints> {
    let ea = classical_band(model, e)?;
    if matches!(model.spec(), crate::models::ModelSpec::Constant { .. }) {
        return Err(Error::Divergent(
            "constant profile: trajectories are open and never turn".into(),
        ));
    }
    let wm = model.w_min();
    let (wall, hi_edge) = model.domain();
    let g = |x: f64| 2.0 * model.w(x).unwrap_or(f64::NAN) - ea;
    // Upper turning point: bracket by doubling from the minimum.
    let mut lo = wm.at.max(wall);
    if lo == 0.0 {
        lo = 1e-12;
    }
    let mut hi = 2.0 * lo.max(1e-6);
    let mut grow = 0;
    while hi < hi_edge && g(hi) < 0.0 {
        lo = hi;
        hi = (hi * 2.0).min(hi_edge);
        grow += 1;
        if grow > 200 {
            return Err(Error::Divergent(format!("no upper turning point found below {hi}")));
        }
    }
    if g(hi) < 0.0 {
        return Err(Error::Domain(format!(
            "upper turning point for E = {e} lies beyond the data window (x > {hi_edge})"
        )));
    }
    let upper = if g(lo) >= 0.0 {
        // The minimum already satisfies 2w >= |E| only at threshold; the
        // bracket degenerated, take lo itself.
        lo
    } else {
        let root = find_root(&g, Bracket { lo, hi, f_lo: g(lo), f_hi: g(hi) }, 1e-13)?;
        snap_to_allowed(&g, root, true)
    };
    if !wm.interior {
        return Ok(TurningPoints { lower: wall, upper, smooth_lower: false });
    }
    // Interior minimum: a smooth lower turning point sits between the
    // wall and the minimum.  Shrink toward the wall until 2w > |E|.
    let mut lo2 = if wall > 0.0 { wall + 0.5 * (wm.at - wall) } else { 0.5 * wm.at };
    let mut shrink = 0;
    while g(lo2) < 0.0 {
        lo2 = if wall > 0.0 { wall + 0.5 * (lo2 - wall) } else { 0.5 * lo2 };
        shrink += 1;
        if shrink > 200 {
            return Err(Error::Divergent("no smooth lower turning point found".into()));
        }
    }
    let lower = find_root(
        &g,
        Bracket { lo: lo2, hi: wm.at, f_lo: g(lo2), f_hi: g(wm.at) },
        1e-13,
    )?;
    let lower = snap_to_allowed(&g, lower, false);
    Ok(TurningPoints { lower, upper, smooth_lower: true })
}

/// Nudge a turning-point estimate onto the classically allowed side
/// (g <= 0) by float bisection.  Root finding alone can land a rounding
/// error into the forbidden side, where integrands built on
/// sqrt(E^2 - 4 U V) see a spurious zero or negative discriminant.
fn snap_to_allowed<G: Fn(f64) -> f64>(g: &G, root: f64, from_below: bool) -> f64 {
    let step = 1e-8 * (1.0 + root.abs());
    let (mut ok, bad) = if from_below { (root - step, root + step) } else { (root + step, root - step) };
    if g(ok) > 0.0 {
        // The estimate is off by more than the probe step; keep it.
        return root;
    }
    if g(bad) <= 0.0 {
        return bad;
    }
    let mut bad = bad;
    for _ in 0..90 {
        let mid = 0.5 * (ok + bad);
        if mid == ok || mid == bad {
            break;
        }
        if g(mid) <= 0.0 {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    ok
}

/// Period of the bounded orbit at energy E:
/// T = |E| integral dx / (U sqrt(E^2 - 4 U V)) over the allowed region.
pub fn period(model: &XpModel, e: f64) -> Result<f64> {
    let ea = classical_band(model, e)?;
    let tp = turning_points(model, e)?;
    let f = |x: f64| {
        let u = model.u2(x).unwrap_or(f64::NAN);
        let v = model.v2(x).unwrap_or(f64::NAN);
        let disc = ea * ea - 4.0 * u * v;
        // Rounding can push a node a hair past a turning point; a zero
        // sample there integrates to nothing, unlike the infinity the
        // bare division would produce.
        if disc <= 0.0 {
            return 0.0;
        }
        ea / (u * disc.sqrt())
    };
    let lower_hint = if tp.smooth_lower { Hint::InverseSqrtLower } else { Hint::None };
    let q = integrate_split(f, tp.lower, tp.upper, Tol::default(), lower_hint, Hint::InverseSqrtUpper)?;
    Ok(q.value)
}

/// Closed-form period of the linear profile, used as an oracle.
pub fn period_linear(alpha: f64, w0: f64, e: f64) -> f64 {
    (e.abs() / (2.0 * w0)).acosh() / alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, ModelSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn branches_multiply_to_v_over_u() {
        let m = make_model(ModelSpec::BerryKeating { h: 1.0 }, 1.0).unwrap();
        let (p_plus, p_minus) = momentum_branches(&m, 10.0, 2.0).unwrap();
        assert!(p_plus > 1.0 && p_minus < 1.0 && p_minus > 0.0);
        assert!(close(p_plus * p_minus, 1.0, 1e-14));
        let g = make_model(ModelSpec::ModelIii { lx: 1.0, lp: 2.0 }, 1.0).unwrap();
        let (a, b) = momentum_branches(&g, 14.0, 3.0).unwrap();
        let ratio = g.v2(3.0).unwrap() / g.u2(3.0).unwrap();
        assert!(close(a * b, ratio, 1e-13));
    }

    #[test]
    fn negative_energy_branches_mirror_positive_ones() {
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: 1.0 }, 1.0).unwrap();
        let (pp, pm) = momentum_branches(&m, 9.0, 2.0).unwrap();
        let (np, nm) = momentum_branches(&m, -9.0, 2.0).unwrap();
        assert!(close(np, -pp, 1e-14) && close(nm, -pm, 1e-14));
    }

    #[test]
    fn forbidden_region_is_rejected() {
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: 1.0 }, 1.0).unwrap();
        // At x = 10, 2w = 20 > E = 5.
        assert!(momentum_branches(&m, 5.0, 10.0).is_err());
    }

    #[test]
    fn linear_turning_point_is_e_over_two_alpha() {
        let (alpha, h) = (1.7, 0.4);
        let m = make_model(ModelSpec::Linear { alpha, h }, 1.0).unwrap();
        let tp = turning_points(&m, 12.0).unwrap();
        assert!(!tp.smooth_lower);
        assert_eq!(tp.lower, h);
        assert!(close(tp.upper, 12.0 / (2.0 * alpha), 1e-12));
    }

    #[test]
    fn berry_keating_turning_points_multiply_to_h_squared() {
        let h = 1.3;
        let m = make_model(ModelSpec::BerryKeating { h }, 1.0).unwrap();
        for e in [6.0, 11.0, 40.0] {
            let tp = turning_points(&m, e).unwrap();
            assert!(tp.smooth_lower, "E = {e}");
            assert!(close(tp.lower * tp.upper, h * h, 1e-11), "E = {e}");
            assert!(close(tp.lower + tp.upper, e / 2.0, 1e-11), "E = {e}");
        }
    }

    #[test]
    fn below_threshold_there_is_no_orbit() {
        let m = make_model(ModelSpec::BerryKeating { h: 1.0 }, 1.0).unwrap();
        match turning_points(&m, 3.9) {
            Err(Error::NoOrbit { threshold, .. }) => assert!(close(threshold, 4.0, 1e-14)),
            other => panic!("expected NoOrbit, got {other:?}"),
        }
    }

    #[test]
    fn constant_profile_trajectories_are_open() {
        let m = make_model(ModelSpec::Constant { c: 1.0 }, 1.0).unwrap();
        assert!(matches!(turning_points(&m, 5.0), Err(Error::Divergent(_))));
        assert!(matches!(period(&m, 5.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn linear_period_matches_closed_form() {
        let (alpha, h) = (0.9, 1.1);
        let m = make_model(ModelSpec::Linear { alpha, h }, 1.0).unwrap();
        for e in [3.0, 10.0, 77.0] {
            let t = period(&m, e).unwrap();
            let expect = period_linear(alpha, alpha * h, e);
            assert!(close(t, expect, 1e-9), "E = {e}: {t} vs {expect}");
        }
    }

    #[test]
    fn negative_energy_orbit_has_the_same_period() {
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: 1.0 }, 1.0).unwrap();
        assert!(close(period(&m, -9.0).unwrap(), period(&m, 9.0).unwrap(), 1e-11));
    }

    #[test]
    fn gauge_reduction_preserves_the_period() {
        let m = make_model(ModelSpec::ModelIii { lx: 0.9, lp: 1.4 }, 1.0).unwrap();
        let red = crate::models::gauge::to_symmetric_gauge(&m).unwrap();
        for e in [5.0, 16.0] {
            let t_src = period(&m, e).unwrap();
            let t_img = period(&red.image, e).unwrap();
            assert!(close(t_src, t_img, 1e-8), "E = {e}: {t_src} vs {t_img}");
        }
    }

    #[test]
    fn berry_keating_period_agrees_with_count_slope() {
        // T = 2 pi hbar dn/dE links the period to the counting function;
        // check against a numerical derivative of the phase-space count.
        let m = make_model(ModelSpec::BerryKeating { h: 1.0 }, 1.0).unwrap();
        let e = 9.0;
        let t = period(&m, e).unwrap();
        let de = 1e-4;
        let n = |e: f64| crate::semiclassics::count_states(&m, e).unwrap();
        let slope = (n(e + de) - n(e - de)) / (2.0 * de);
        assert!(
            close(t, 2.0 * std::f64::consts::PI * slope, 1e-6),
            "{t} vs {}",
            2.0 * std::f64::consts::PI * slope
        );
    }
}
