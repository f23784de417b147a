//! Scalar curvature of the spacetime a model generates.
//!
//! In the symmetric gauge the metric curvature reduces to
//! R(x) = -2 w''(x) / w(x); in the generic gauge the same quantity is
//! R = -(1/V) d/dx (W'/V) with W = U V.  Both expressions are
//! implemented: the analytic one per catalog entry and a nested
//! finite-difference evaluation of the generic formula used as an
//! independent cross-check.

use crate::error::Result;
use crate::models::{ModelSpec, XpModel};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CurvatureSample {
    pub x: f64,
    pub r: f64,
    /// Set when the value comes from one-sided differences near a data
    /// edge and carries extra truncation error.
    pub degraded: bool,
}

/// Curvature through the per-model analytic formula (interpolant
/// derivatives for tabulated data).
pub fn scalar_curvature(model: &XpModel, x: f64) -> Result<CurvatureSample> {
    model.check_x(x)?;
    let (r, degraded) = match model.spec() {
        ModelSpec::Linear { .. } | ModelSpec::Constant { .. } | ModelSpec::ModelIii { .. } => {
            // Model III has W'/V = 2 identically, so it is flat despite
            // its generic gauge.
            (0.0, false)
        }
        ModelSpec::Cosh { mu, .. } => {
            let s = mu * model.hbar();
            (-1.0 / (2.0 * s * s), false)
        }
        ModelSpec::Tabulated { xs, .. } => {
            let w = model.w(x)?;
            let w2 = model.w_second(x)?;
            let degraded = x < xs[1] || x > xs[xs.len() - 2];
            (-2.0 * w2 / w, degraded)
        }
        _ => {
            let w = model.w(x)?;
            (-2.0 * model.w_second(x)? / w, false)
        }
    };
    Ok(CurvatureSample { x, r, degraded })
}

/// Curvature by nested five-point differences of -(1/V) d/dx (W'/V).
/// Works for any model whose domain contains [x - 4h, x + 4h]; used to
/// validate the analytic route, not as the primary evaluator.
pub fn scalar_curvature_fd(model: &XpModel, x: f64) -> Result<CurvatureSample> {
    let h = 3e-3 * (1.0 + x.abs());
    let big_w = |y: f64| -> Result<f64> { Ok(model.u2(y)? * model.v2(y)?) };
    let w_slope = |y: f64| -> Result<f64> {
        Ok((-big_w(y + 2.0 * h)? + 8.0 * big_w(y + h)? - 8.0 * big_w(y - h)?
            + big_w(y - 2.0 * h)?)
            / (12.0 * h))
    };
    let g = |y: f64| -> Result<f64> { Ok(w_slope(y)? / model.v2(y)?) };
    let g_slope = (-g(x + 2.0 * h)? + 8.0 * g(x + h)? - 8.0 * g(x - h)? + g(x - 2.0 * h)?)
        / (12.0 * h);
    Ok(CurvatureSample { x, r: -g_slope / model.v2(x)?, degraded: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, ModelSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn flat_members_have_zero_curvature() {
        let flats = vec![
            make_model(ModelSpec::Linear { alpha: 2.0, h: 0.3 }, 1.0).unwrap(),
            make_model(ModelSpec::Constant { c: 1.4 }, 1.0).unwrap(),
            make_model(ModelSpec::ModelIii { lx: 0.9, lp: 1.6 }, 1.0).unwrap(),
        ];
        for m in &flats {
            for x in [1.0, 3.0, 10.0] {
                assert_eq!(scalar_curvature(m, x).unwrap().r, 0.0, "{}", m.kind_name());
                let fd = scalar_curvature_fd(m, x).unwrap().r;
                assert!(fd.abs() < 1e-6, "{} fd at {x}: {fd}", m.kind_name());
            }
        }
    }

    #[test]
    fn cosh_curvature_is_constant_negative() {
        let (w0, mu, hbar) = (1.7, 0.8, 0.5);
        let m = make_model(ModelSpec::Cosh { w0, mu }, hbar).unwrap();
        let expect = -1.0 / (2.0 * (mu * hbar) * (mu * hbar));
        for x in [0.2, 1.0, 2.5] {
            assert!(close(scalar_curvature(&m, x).unwrap().r, expect, 1e-14));
        }
        assert!(close(scalar_curvature_fd(&m, 1.0).unwrap().r, expect, 1e-6));
    }

    #[test]
    fn power_curvature_matches_closed_form() {
        let (amp, exponent, lower) = (0.7, 1.6, 0.2);
        let m = make_model(ModelSpec::Power { amp, exponent, lower }, 1.0).unwrap();
        for x in [0.8, 2.0, 6.0] {
            let expect = -2.0 * exponent * (exponent - 1.0) / (x * x);
            assert!(close(scalar_curvature(&m, x).unwrap().r, expect, 1e-13));
        }
        // Amplitude drops out of the curvature.
        let m2 = make_model(ModelSpec::Power { amp: 5.0 * amp, exponent, lower }, 1.0).unwrap();
        assert!(close(
            scalar_curvature(&m, 2.0).unwrap().r,
            scalar_curvature(&m2, 2.0).unwrap().r,
            1e-14
        ));
    }

    #[test]
    fn linear_log_curvature_matches_closed_form() {
        let (alpha, beta, h) = (1.0, 0.6, 1.0);
        let m = make_model(ModelSpec::LinearLog { alpha, beta, h }, 1.0).unwrap();
        for x in [1.5, 4.0, 20.0] {
            let w = m.w(x).unwrap();
            let expect = 2.0 * beta / (x * x * w);
            assert!(close(scalar_curvature(&m, x).unwrap().r, expect, 1e-13));
        }
    }

    #[test]
    fn fd_route_confirms_analytic_route() {
        let cases = vec![
            make_model(ModelSpec::BerryKeating { h: 1.2 }, 1.0).unwrap(),
            make_model(ModelSpec::Cosh { w0: 1.0, mu: 1.5 }, 1.0).unwrap(),
            make_model(ModelSpec::LinearLog { alpha: 1.0, beta: 0.8, h: 0.9 }, 1.0).unwrap(),
            make_model(ModelSpec::Power { amp: 1.3, exponent: 0.6, lower: 0.0 }, 1.0).unwrap(),
        ];
        for m in &cases {
            for x in [1.4, 2.6, 5.0] {
                let a = scalar_curvature(m, x).unwrap().r;
                let fd = scalar_curvature_fd(m, x).unwrap().r;
                assert!(
                    (a - fd).abs() <= 1e-6 * (1.0 + a.abs()),
                    "{} at {x}: analytic {a} vs fd {fd}",
                    m.kind_name()
                );
            }
        }
    }

    #[test]
    fn berry_keating_curvature_closed_form() {
        let h = 2.0;
        let m = make_model(ModelSpec::BerryKeating { h }, 1.0).unwrap();
        for x in [0.7, 2.0, 5.0] {
            let expect = -4.0 * h * h / (x * x * (x * x + h * h));
            assert!(close(scalar_curvature(&m, x).unwrap().r, expect, 1e-13));
        }
    }

    #[test]
    fn tabulated_curvature_tracks_the_sampled_model() {
        let src = make_model(ModelSpec::BerryKeating { h: 1.0 }, 1.0).unwrap();
        let xs: Vec<f64> = (0..400).map(|i| 0.4 + 0.02 * i as f64).collect();
        let ws: Vec<f64> = xs.iter().map(|x| src.w(*x).unwrap()).collect();
        let tab = make_model(ModelSpec::Tabulated { xs, ws }, 1.0).unwrap();
        let mid = scalar_curvature(&tab, 1.0).unwrap();
        let expect = scalar_curvature(&src, 1.0).unwrap().r;
        assert!(!mid.degraded);
        assert!(
            (mid.r - expect).abs() < 0.05 * expect.abs(),
            "tabulated {} vs analytic {expect}",
            mid.r
        );
        assert!(scalar_curvature(&tab, 0.405).unwrap().degraded);
        assert!(scalar_curvature(&tab, 8.37).unwrap().degraded);
    }
}
