//! Abel-type inversion: from a counting function back to the profile.
//!
//! For the xp family the enclosed-area integral can be run backwards.
//! With g(E) = E d/dE [n(2E)/E] the profile obeys
//!
//!   x(w) = x0 + 2 hbar w int_{w0}^{w} dE g(E) / sqrt(w^2 - E^2),
//!
//! and the substitution E = w sin(phi) absorbs the inverse-sqrt kernel.
//! For the standard family H = p^2 + V(x) the analogue is
//!
//!   x(V) = hbar int_{V0}^{V} dE n'(E) / sqrt(V - E),
//!
//! handled the same way with E = V0 + (V - V0) sin^2(phi).
//!
//! The xp kernel annihilates any term of n linear in E, so the map is
//! many-to-one; [`recover_linear_term`] rebuilds the count from the
//! recovered profile and fits the lost slope.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{make_model, ModelSpec};
use crate::numerics::quadrature::{integrate, Hint, Tol};

use super::{count_states, parse_two_column_csv};

/// Which Hamiltonian family an inverted profile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileFamily {
    Xp,
    Standard,
}

impl ProfileFamily {
    fn source_tag(self) -> &'static str {
        match self {
            ProfileFamily::Xp => "xp-inversion",
            ProfileFamily::Standard => "standard-inversion",
        }
    }
}

/// A reconstructed profile: (w, x) pairs for the xp family, (V, x) for
/// the standard one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionResult {
    pub profile: Vec<(f64, f64)>,
    pub family: ProfileFamily,
    /// Inversion does not guarantee an invertible profile; this is
    /// cleared when the recovered x dips as w grows, in which case the
    /// pairs do not define a function w(x).
    pub monotone: bool,
}

impl InversionResult {
    fn from_profile(profile: Vec<(f64, f64)>, family: ProfileFamily) -> InversionResult {
        let monotone = profile
            .windows(2)
            .all(|p| p[1].1 >= p[0].1 - 1e-9 * (1.0 + p[0].1.abs()));
        InversionResult { profile, family, monotone }
    }

    /// Two-column CSV with the same comment-header scheme as counting
    /// curves; the family rides in the source tag.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# source={}\n# monotone={}\n", self.family.source_tag(), self.monotone);
        for &(v, x) in &self.profile {
            out.push_str(&format!("{v},{x}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<InversionResult> {
        let (profile, header) = parse_two_column_csv(text)?;
        let family = match header.iter().find(|(k, _)| k == "source") {
            Some((_, v)) if v == "xp-inversion" => ProfileFamily::Xp,
            Some((_, v)) if v == "standard-inversion" => ProfileFamily::Standard,
            Some((_, v)) => {
                return Err(Error::Domain(format!("unknown inversion source '{v}'")))
            }
            None => {
                return Err(Error::Domain(
                    "profile CSV is missing the '# source=' header".into(),
                ))
            }
        };
        let mut result = InversionResult::from_profile(profile, family);
        if let Some((_, v)) = header.iter().find(|(k, _)| k == "monotone") {
            result.monotone = v == "true";
        }
        Ok(result)
    }
}

/// Derivative of n at `arg`, analytic when supplied, otherwise a
/// central difference with step max(1e-4, 1e-6 |arg|); the stencil
/// turns one-sided when it would cross the domain edge.
fn slope_at(
    n: &dyn Fn(f64) -> f64,
    dn: Option<&dyn Fn(f64) -> f64>,
    arg: f64,
    edge: f64,
) -> f64 {
    if let Some(d) = dn {
        return d(arg);
    }
    let h = 1e-4f64.max(1e-6 * arg.abs());
    if arg - h >= edge {
        (n(arg + h) - n(arg - h)) / (2.0 * h)
    } else {
        (-3.0 * n(arg) + 4.0 * n(arg + h) - n(arg + 2.0 * h)) / (2.0 * h)
    }
}

fn check_grid(grid: &[f64], start: f64, label: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{label} grid is empty")));
    }
    if grid[0] < start - 1e-12 * (1.0 + start.abs()) {
        return Err(Error::Domain(format!(
            "{label} grid starts at {} below the threshold {start}",
            grid[0]
        )));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Domain(format!("{label} grid must ascend strictly")));
    }
    Ok(())
}

/// Recovers the xp profile x(w) from a counting function n defined
/// above the threshold E = 2 w0.  `dn`, when given, is the analytic
/// derivative of n; otherwise a finite difference is used, which needs
/// n evaluable slightly past twice the last grid point.  Grid points
/// are independent, so each output pair stands on its own even when
/// the whole is flagged non-monotone.
pub fn abel_invert_xp(
    n: &dyn Fn(f64) -> f64,
    dn: Option<&dyn Fn(f64) -> f64>,
    w0: f64,
    x0: f64,
    hbar: f64,
    w_grid: &[f64],
) -> Result<InversionResult> {
    if !(w0 > 0.0) || !(hbar > 0.0) {
        return Err(Error::Domain(format!("need w0 > 0 and hbar > 0, got {w0}, {hbar}")));
    }
    check_grid(w_grid, w0, "w")?;
    let g = |e: f64| {
        // Quadrature nodes keep phi strictly inside the interval, but
        // rounding can still graze the threshold; clamping costs
        // nothing because the kernel endpoint has measure zero.
        let e = e.max(w0);
        2.0 * slope_at(n, dn, 2.0 * e, 2.0 * w0) - n(2.0 * e) / e
    };
    let mut profile = Vec::with_capacity(w_grid.len());
    for &w in w_grid {
        let phi0 = (w0 / w).min(1.0).asin();
        let q = integrate(
            |phi: f64| g(w * phi.sin()),
            phi0,
            FRAC_PI_2,
            Tol::default(),
            Hint::InverseSqrtLower,
        )?;
        profile.push((w, x0 + 2.0 * hbar * w * q.value));
    }
    Ok(InversionResult::from_profile(profile, ProfileFamily::Xp))
}

/// Recovers x(V) for the standard family from a counting function n
/// defined above V0.  Same derivative conventions as the xp variant.
pub fn abel_invert_standard(
    n: &dyn Fn(f64) -> f64,
    dn: Option<&dyn Fn(f64) -> f64>,
    v0: f64,
    hbar: f64,
    v_grid: &[f64],
) -> Result<InversionResult> {
    if !(hbar > 0.0) {
        return Err(Error::Domain(format!("need hbar > 0, got {hbar}")));
    }
    check_grid(v_grid, v0, "V")?;
    let mut profile = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let span = (v - v0).max(0.0);
        let q = integrate(
            |phi: f64| {
                let s = phi.sin();
                slope_at(n, dn, v0 + span * s * s, v0) * s
            },
            0.0,
            FRAC_PI_2,
            Tol::default(),
            Hint::None,
        )?;
        profile.push((v, 2.0 * hbar * span.sqrt() * q.value));
    }
    Ok(InversionResult::from_profile(profile, ProfileFamily::Standard))
}

/// Closed-form profile recovered from the linear count plus a constant
/// mu: x - x0 as a function of w.  Asymptotically w(x) ~ x + 2 mu hbar
/// log x, a linear profile with a logarithmic correction.
pub fn linear_log_profile(w: f64, w0: f64, mu: f64, hbar: f64) -> f64 {
    let c = (1.0 - (w0 / w).powi(2)).max(0.0).sqrt();
    (w - w0) + mu * hbar * ((1.0 - c) / (1.0 + c)).ln()
}

/// Wu-Sprung closed-form profile x(V) reproduced asymptotically by
/// inverting the smooth zero count.
pub fn wu_sprung_profile(v: f64) -> f64 {
    use std::f64::consts::{E, PI};
    v.sqrt() / PI * (2.0 * v / (PI * E * E)).ln()
}

/// The natural lower limit for the Wu-Sprung inversion: the smooth
/// zero-count density vanishes at 2 pi.
pub fn wu_sprung_v0() -> f64 {
    2.0 * std::f64::consts::PI
}

/// Prime-count profile x(V) ~ sqrt(V)/log V obtained from n = Li(E),
/// whose lower limit is Li's zero at E = 2.
pub fn mussardo_profile(v: f64) -> f64 {
    v.sqrt() / v.ln()
}

/// Fits the linear-in-E term that the xp kernel annihilates.  The
/// recovered profile is rebuilt as a tabulated model, its count is
/// recomputed, and the residual n(E) - n_rebuilt(E) is fitted as
/// gamma E at a few probe energies inside the tabulated window.
pub fn recover_linear_term(
    result: &InversionResult,
    n: &dyn Fn(f64) -> f64,
    hbar: f64,
) -> Result<f64> {
    if result.family != ProfileFamily::Xp {
        return Err(Error::Domain("linear-term recovery applies to the xp family".into()));
    }
    if !result.monotone {
        return Err(Error::Domain(
            "recovered profile is not monotone, so it does not define w(x)".into(),
        ));
    }
    let mut xs: Vec<f64> = Vec::with_capacity(result.profile.len());
    let mut ws: Vec<f64> = Vec::with_capacity(result.profile.len());
    for &(w, x) in &result.profile {
        if let Some(&last) = xs.last() {
            if x <= last + 1e-12 * (1.0 + last.abs()) {
                continue;
            }
        }
        xs.push(x);
        ws.push(w);
    }
    if xs.len() < 4 {
        return Err(Error::Domain("profile has too few distinct points to rebuild".into()));
    }
    let model = make_model(ModelSpec::Tabulated { xs, ws: ws.clone() }, hbar)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for f in [0.50, 0.62, 0.74, 0.86] {
        let idx = ((ws.len() - 1) as f64 * f) as usize;
        let e = 2.0 * ws[idx];
        let diff = n(e) - count_states(&model, e)?;
        num += e * diff;
        den += e * e;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::period;
    use crate::models::make_model;
    use crate::numerics::quadrature::log_integral;
    use crate::semiclassics::geometric_grid;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    /// Linear-profile count, the alpha = 1 closed form.
    fn linear_count(e: f64, w0: f64, hbar: f64) -> f64 {
        if e <= 2.0 * w0 {
            return 0.0;
        }
        let r = 2.0 * w0 / e;
        e / (2.0 * PI * hbar) * ((e / (2.0 * w0)).acosh() - (1.0 - r * r).sqrt())
    }

    fn linear_count_slope(e: f64, w0: f64, hbar: f64) -> f64 {
        if e <= 2.0 * w0 {
            return 0.0;
        }
        (e / (2.0 * w0)).acosh() / (2.0 * PI * hbar)
    }

    #[test]
    fn cosh_ladder_inverts_to_the_cosh_profile() {
        // n = mu (E/2w0 - 1) pulls back to x = x0 + 2 mu hbar acosh(w/w0),
        // i.e. w(x) = w0 cosh((x - x0)/(2 mu hbar)).
        let (w0, mu, hbar, x0) = (1.1, 0.8, 0.6, 0.3);
        let n = move |e: f64| mu * (e / (2.0 * w0) - 1.0);
        let dn = move |_e: f64| mu / (2.0 * w0);
        let grid = geometric_grid(w0, 20.0 * w0, 200).unwrap();
        let res = abel_invert_xp(&n, Some(&dn), w0, x0, hbar, &grid).unwrap();
        assert!(res.monotone);
        for &(w, x) in &res.profile {
            let expect = x0 + 2.0 * mu * hbar * (w / w0).acosh();
            assert!(close(x, expect, 1e-8), "w = {w}: {x} vs {expect}");
        }
    }

    #[test]
    fn flat_count_inverts_to_the_linear_profile() {
        let (w0, hbar, x0) = (1.4, 1.0, 1.4);
        let n = move |e: f64| linear_count(e, w0, hbar);
        let dn = move |e: f64| linear_count_slope(e, w0, hbar);
        let grid = geometric_grid(w0, 30.0 * w0, 80).unwrap();
        let res = abel_invert_xp(&n, Some(&dn), w0, x0, hbar, &grid).unwrap();
        assert!(res.monotone);
        for &(w, x) in &res.profile {
            assert!(close(x - x0, w - w0, 1e-8), "w = {w}: {} vs {}", x - x0, w - w0);
        }
        // Same target through the finite-difference fallback.
        let fd = abel_invert_xp(&n, None, w0, x0, hbar, &grid).unwrap();
        for &(w, x) in &fd.profile {
            assert!(close(x - x0, w - w0, 1e-6), "fd w = {w}");
        }
    }

    #[test]
    fn log_corrected_count_matches_the_closed_form_profile() {
        // Adding a constant mu to the linear count buys a logarithmic
        // term in the profile; near threshold the exact inverse dips
        // below x0, so the result is flagged as non-invertible there.
        let (w0, mu, hbar, x0) = (1.0, 0.6, 1.0, 0.0);
        let n = move |e: f64| linear_count(e, w0, hbar) + mu;
        let dn = move |e: f64| linear_count_slope(e, w0, hbar);
        let grid = geometric_grid(w0, 50.0 * w0, 200).unwrap();
        let res = abel_invert_xp(&n, Some(&dn), w0, x0, hbar, &grid).unwrap();
        assert!(!res.monotone);
        for &(w, x) in &res.profile {
            let expect = x0 + linear_log_profile(w, w0, mu, hbar);
            assert!(close(x, expect, 1e-6), "w = {w}: {x} vs {expect}");
        }
        // Far from threshold the log coefficient is 2 mu hbar.
        let far = linear_log_profile(1e4, w0, mu, hbar);
        let asym = (1e4 - w0) + 2.0 * mu * hbar * (w0 / (2.0 * 1e4)).ln();
        assert!(close(far, asym, 1e-7));
    }

    #[test]
    fn adding_a_linear_term_changes_nothing() {
        let (w0, hbar, gamma) = (1.0, 1.0, 0.35);
        let base = move |e: f64| linear_count(e, w0, hbar);
        let tilted = move |e: f64| linear_count(e, w0, hbar) + gamma * e;
        let grid = geometric_grid(w0, 20.0 * w0, 40).unwrap();
        let a = abel_invert_xp(&base, None, w0, 0.0, hbar, &grid).unwrap();
        let b = abel_invert_xp(&tilted, None, w0, 0.0, hbar, &grid).unwrap();
        for (&(w, xa), &(_, xb)) in a.profile.iter().zip(&b.profile) {
            assert!(close(xa, xb, 1e-8), "w = {w}: {xa} vs {xb}");
        }
    }

    #[test]
    fn identity_profile_round_trips_through_the_count() {
        // w(x) = x on (2, inf): count it numerically, invert, and the
        // profile must come back as x(w) = w.  The derivative is fed
        // from the period so the count's quadrature jitter is not
        // amplified by differencing.
        let w0 = 2.0;
        let m = make_model(ModelSpec::Linear { alpha: 1.0, h: w0 }, 1.0).unwrap();
        let n = {
            let m = m.clone();
            move |e: f64| count_states(&m, e).unwrap_or(0.0)
        };
        let dn = {
            let m = m.clone();
            move |e: f64| period(&m, e).unwrap_or(0.0) / (2.0 * PI)
        };
        let grid = geometric_grid(w0, 10.0 * w0, 60).unwrap();
        let res = abel_invert_xp(&n, Some(&dn), w0, w0, 1.0, &grid).unwrap();
        assert!(res.monotone);
        for &(w, x) in &res.profile {
            assert!((x - w).abs() <= 1e-6 * (1.0 + w), "w = {w}: x = {x}");
        }
    }

    #[test]
    fn gamma_recovery_finds_the_hidden_linear_term() {
        let (w0, hbar, gamma) = (2.0, 1.0, 0.3);
        let n = move |e: f64| linear_count(e, w0, hbar) + gamma * e;
        let dn = move |e: f64| linear_count_slope(e, w0, hbar) + gamma;
        let grid = geometric_grid(w0, 20.0 * w0, 200).unwrap();
        let res = abel_invert_xp(&n, Some(&dn), w0, w0, hbar, &grid).unwrap();
        assert!(res.monotone);
        let fitted = recover_linear_term(&res, &n, hbar).unwrap();
        assert!(close(fitted, gamma, 1e-6), "gamma {fitted} vs {gamma}");
    }

    #[test]
    fn recovery_requires_an_invertible_profile() {
        let res = InversionResult::from_profile(
            vec![(1.0, 0.0), (2.0, -0.5), (3.0, 0.4), (4.0, 1.0)],
            ProfileFamily::Xp,
        );
        assert!(!res.monotone);
        assert!(recover_linear_term(&res, &|e| e, 1.0).is_err());
    }

    #[test]
    fn standard_harmonic_count_gives_a_sqrt_profile() {
        let (v0, c, hbar) = (1.5, 0.8, 0.9);
        let n = move |e: f64| c * (e - v0);
        let grid: Vec<f64> = (0..40).map(|i| v0 + 0.5 * i as f64).collect();
        let res = abel_invert_standard(&n, None, v0, hbar, &grid).unwrap();
        assert!(res.monotone);
        for &(v, x) in &res.profile {
            let expect = 2.0 * hbar * c * (v - v0).sqrt();
            assert!(close(x, expect, 1e-9), "V = {v}: {x} vs {expect}");
        }
    }

    #[test]
    fn smooth_zero_count_reproduces_the_wu_sprung_profile() {
        // n' = log(E/2pi)/2pi; the asymptotic profile is insensitive
        // to the choice of V0, fixed here where the density vanishes.
        let n = |e: f64| e / (2.0 * PI) * ((e / (2.0 * PI)).ln() - 1.0) + 7.0 / 8.0;
        let dn = |e: f64| (e / (2.0 * PI)).ln() / (2.0 * PI);
        let v0 = wu_sprung_v0();
        let grid = [v0, 1e3, 1e4];
        let res = abel_invert_standard(&n, Some(&dn), v0, 1.0, &grid).unwrap();
        let r3 = res.profile[1].1 / wu_sprung_profile(1e3);
        let r4 = res.profile[2].1 / wu_sprung_profile(1e4);
        assert!((r3 - 1.0).abs() < 2e-3, "ratio at 1e3: {r3}");
        assert!((r4 - 1.0).abs() < 5e-4, "ratio at 1e4: {r4}");
    }

    #[test]
    fn prime_count_scales_like_the_mussardo_profile() {
        let n = |e: f64| log_integral(e, Tol::default()).unwrap_or(0.0);
        let dn = |e: f64| 1.0 / e.ln();
        let grid = [2.0, 1e4, 1e6];
        let res = abel_invert_standard(&n, Some(&dn), 2.0, 1.0, &grid).unwrap();
        let z4 = res.profile[1].1 / mussardo_profile(1e4);
        let z6 = res.profile[2].1 / mussardo_profile(1e6);
        // The ratio drifts toward its limit only logarithmically.
        assert!((1.5..2.6).contains(&z4), "z(1e4) = {z4}");
        assert!((1.5..2.6).contains(&z6), "z(1e6) = {z6}");
        assert!((z6 / z4 - 1.0).abs() < 0.1, "{z4} vs {z6}");
    }

    #[test]
    fn profile_csv_round_trip_is_exact() {
        let res = InversionResult::from_profile(
            vec![(1.0, 0.0), (1.5, 0.6180339887498949), (2.0, 1.1)],
            ProfileFamily::Xp,
        );
        let csv = res.to_csv();
        assert!(csv.starts_with("# source=xp-inversion\n"));
        let back = InversionResult::from_csv(&csv).unwrap();
        assert_eq!(back.profile, res.profile);
        assert_eq!(back.family, ProfileFamily::Xp);
        assert!(back.monotone);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let n = |e: f64| e;
        assert!(abel_invert_xp(&n, None, 1.0, 0.0, 1.0, &[]).is_err());
        assert!(abel_invert_xp(&n, None, 1.0, 0.0, 1.0, &[0.5, 2.0]).is_err());
        assert!(abel_invert_xp(&n, None, 1.0, 0.0, 1.0, &[1.0, 3.0, 2.0]).is_err());
        assert!(abel_invert_standard(&n, None, 1.0, 1.0, &[1.0, 1.0]).is_err());
    }
}
