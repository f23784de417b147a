//! Gauge transformations between equivalent Hamiltonians.
//!
//! A coordinate change x -> x' with a matching momentum rescaling maps
//! H = U p + V/p into a new member of the same family while preserving
//! the spectrum and the classical orbits.  Two reductions are provided:
//! the symmetric gauge (U = V = w) and the p-gauge (U = 1), in which the
//! whole model collapses into a single potential V_p.

use crate::error::{Error, Result};
use crate::models::{make_model, ModelSpec, XpModel};
use crate::numerics::quadrature::{integrate, Hint, Tol};
use crate::numerics::roots::{find_root, Bracket};

type MapFn = Box<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// An invertible coordinate map x -> x'.
pub struct GaugeMap {
    forward: MapFn,
    inverse: MapFn,
}

impl GaugeMap {
    pub fn new(forward: MapFn, inverse: MapFn) -> Self {
        GaugeMap { forward, inverse }
    }

    pub fn identity() -> Self {
        GaugeMap {
            forward: Box::new(|x| Ok(x)),
            inverse: Box::new(|x| Ok(x)),
        }
    }

    pub fn forward(&self, x: f64) -> Result<f64> {
        (self.forward)(x)
    }

    pub fn inverse(&self, xp: f64) -> Result<f64> {
        (self.inverse)(xp)
    }
}

/// Result of reducing a model to the symmetric gauge.
pub struct SymmetricReduction {
    pub image: XpModel,
    pub map: GaugeMap,
}

/// Invert a monotone map by bracket doubling plus root refinement.
/// `lo` is the domain edge where the map attains its smallest value.
fn invert_monotone(
    f: impl Fn(f64) -> Result<f64> + Copy,
    lo: f64,
    target: f64,
    f_lo: f64,
) -> Result<f64> {
    if target < f_lo - 1e-12 * (1.0 + f_lo.abs()) {
        return Err(Error::Domain(format!(
            "map inverse: target {target} below range start {f_lo}"
        )));
    }
    if target <= f_lo {
        return Ok(lo);
    }
    let mut hi = if lo > 0.0 { 2.0 * lo } else { 1.0 };
    let mut f_hi = f(hi)?;
    let mut grow = 0;
    while f_hi < target {
        hi *= 2.0;
        f_hi = f(hi)?;
        grow += 1;
        if grow > 200 {
            return Err(Error::Divergent(format!(
                "map inverse: target {target} not reached by x = {hi}"
            )));
        }
    }
    let g = |x: f64| f(x).map(|v| v - target).unwrap_or(f64::NAN);
    let bracket = Bracket { lo, hi, f_lo: f_lo - target, f_hi: f_hi - target };
    find_root(&g, bracket, 1e-13)
}

/// Reduce a model to the symmetric gauge U = V = w.
///
/// The new coordinate integrates v/u from the wall, anchored so that the
/// image profile satisfies w'(x') = w(x).  Symmetric models map to
/// themselves through the identity.  The image of `model-iii` is the
/// linear model with unit slope and wall lx * lp.
pub fn to_symmetric_gauge(model: &XpModel) -> Result<SymmetricReduction> {
    if model.is_symmetric() {
        return Ok(SymmetricReduction {
            image: model.clone(),
            map: GaugeMap::identity(),
        });
    }
    let ModelSpec::ModelIii { lx, lp } = *model.spec() else {
        unreachable!("model-iii is the only non-symmetric catalog entry");
    };
    let wall_image = lx * lp;
    let image = make_model(ModelSpec::Linear { alpha: 1.0, h: wall_image }, model.hbar())?;
    let src = model.clone();
    let fwd = move |x: f64| -> Result<f64> {
        src.check_x(x)?;
        let q = integrate(
            |y| src.v_over_u(y).unwrap_or(f64::NAN),
            0.0,
            x,
            Tol::default(),
            Hint::None,
        )?;
        Ok(wall_image + q.value)
    };
    let src2 = model.clone();
    let fwd2 = move |x: f64| -> Result<f64> {
        src2.check_x(x)?;
        let q = integrate(
            |y| src2.v_over_u(y).unwrap_or(f64::NAN),
            0.0,
            x,
            Tol::default(),
            Hint::None,
        )?;
        Ok(wall_image + q.value)
    };
    let inv = move |xp: f64| -> Result<f64> {
        invert_monotone(&fwd2, 0.0, xp, wall_image)
    };
    Ok(SymmetricReduction {
        image,
        map: GaugeMap::new(Box::new(fwd), Box::new(inv)),
    })
}

/// A model rewritten as H = p + V_p(q)/p.
pub struct PGaugeForm {
    source: XpModel,
    pub map: GaugeMap,
}

impl PGaugeForm {
    /// The potential V_p(q) = w(x(q))^2.
    pub fn v_p(&self, q: f64) -> Result<f64> {
        let x = self.map.inverse(q)?;
        let w = self.source.w(x)?;
        Ok(w * w)
    }
}

/// Reduce a symmetric model to the p-gauge.  The new coordinate is
/// q = integral of dy/w from the wall, so q = 0 at the wall.
pub fn to_p_gauge(model: &XpModel) -> Result<PGaugeForm> {
    if !model.is_symmetric() {
        return Err(Error::Domain(
            "p-gauge reduction needs the symmetric gauge; reduce the model first".into(),
        ));
    }
    let (wall, _) = model.domain();
    let singular_wall = wall == 0.0 && {
        // Near an open origin w may vanish (power profiles); the 1/w
        // integrand then needs the endpoint substitution.
        match model.spec() {
            ModelSpec::Power { .. } => true,
            _ => false,
        }
    };
    let hint = if singular_wall { Hint::InverseSqrtLower } else { Hint::None };
    let src = model.clone();
    let fwd = move |x: f64| -> Result<f64> {
        src.check_x(x)?;
        let q = integrate(
            |y| 1.0 / src.w(y).unwrap_or(f64::NAN),
            wall,
            x,
            Tol::default(),
            hint,
        )?;
        Ok(q.value)
    };
    let src2 = model.clone();
    let fwd2 = move |x: f64| -> Result<f64> {
        src2.check_x(x)?;
        let q = integrate(
            |y| 1.0 / src2.w(y).unwrap_or(f64::NAN),
            wall,
            x,
            Tol::default(),
            hint,
        )?;
        Ok(q.value)
    };
    let inv = move |q: f64| -> Result<f64> { invert_monotone(&fwd2, wall, q, 0.0) };
    Ok(PGaugeForm {
        source: model.clone(),
        map: GaugeMap::new(Box::new(fwd), Box::new(inv)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn symmetric_models_reduce_to_themselves() {
        let m = make_model(ModelSpec::BerryKeating { h: 2.0 }, 1.0).unwrap();
        let red = to_symmetric_gauge(&m).unwrap();
        assert_eq!(red.image.kind_name(), "berry-keating");
        assert_eq!(red.map.forward(3.7).unwrap(), 3.7);
        // Applying the reduction again changes nothing.
        let again = to_symmetric_gauge(&red.image).unwrap();
        assert_eq!(again.image.w(3.7).unwrap(), m.w(3.7).unwrap());
    }

    #[test]
    fn model_iii_maps_to_unit_slope_linear() {
        let (lx, lp) = (0.8, 1.7);
        let m = make_model(ModelSpec::ModelIii { lx, lp }, 1.0).unwrap();
        let red = to_symmetric_gauge(&m).unwrap();
        assert_eq!(red.image.kind_name(), "linear");
        assert!(close(red.image.w_min().value, lx * lp, 1e-14));
        // The map has the closed form x' = lp * sqrt(x^2 + lx^2).
        for x in [0.1, 0.9, 3.0, 12.0] {
            let expect = lp * (x * x + lx * lx).sqrt();
            let got = red.map.forward(x).unwrap();
            assert!(close(got, expect, 1e-10), "forward at {x}: {got} vs {expect}");
            assert!(close(red.map.inverse(got).unwrap(), x, 1e-9), "inverse at {x}");
        }
    }

    #[test]
    fn reduced_profile_matches_source_along_the_map() {
        let m = make_model(ModelSpec::ModelIii { lx: 1.2, lp: 0.6 }, 1.0).unwrap();
        let red = to_symmetric_gauge(&m).unwrap();
        for x in [0.4, 1.2, 5.5] {
            let xp = red.map.forward(x).unwrap();
            assert!(close(red.image.w(xp).unwrap(), m.w(x).unwrap(), 1e-10));
        }
    }

    #[test]
    fn p_gauge_of_linear_has_exponential_potential() {
        let (alpha, h) = (1.5, 0.7);
        let m = make_model(ModelSpec::Linear { alpha, h }, 1.0).unwrap();
        let pg = to_p_gauge(&m).unwrap();
        // q = ln(x/h)/alpha, so V_p = alpha^2 h^2 exp(2 alpha q).
        for x in [0.7, 1.0, 2.0, 9.0] {
            let q = pg.map.forward(x).unwrap();
            assert!(close(q, (x / h).ln() / alpha, 1e-11), "map at {x}");
            let vp = pg.v_p(q).unwrap();
            let expect = alpha * alpha * h * h * (2.0 * alpha * q).exp();
            assert!(close(vp, expect, 1e-9), "V_p at q = {q}");
        }
    }

    #[test]
    fn p_gauge_of_berry_keating_matches_closed_form() {
        let h = 1.3;
        let m = make_model(ModelSpec::BerryKeating { h }, 1.0).unwrap();
        let pg = to_p_gauge(&m).unwrap();
        // q = ln(1 + x^2/h^2)/2 and V_p = h^2 e^{4q} / (e^{2q} - 1).
        for x in [0.5, 1.3, 4.0] {
            let q = pg.map.forward(x).unwrap();
            assert!(close(q, 0.5 * (1.0 + x * x / (h * h)).ln(), 1e-11));
            let e2 = (2.0 * q).exp();
            let expect = h * h * e2 * e2 / (e2 - 1.0);
            assert!(close(pg.v_p(q).unwrap(), expect, 1e-9));
        }
    }

    #[test]
    fn p_gauge_rejects_generic_gauge_input() {
        let m = make_model(ModelSpec::ModelIii { lx: 1.0, lp: 1.0 }, 1.0).unwrap();
        assert!(to_p_gauge(&m).is_err());
    }
}
