//! Semiclassical state counting and the inversions built on it.
//!
//! The number of states with energy below E is the phase-space area
//! enclosed by the classical orbit, in units of 2 pi hbar:
//!
//!   n(E) = (1 / 2 pi hbar) int_{x_m}^{x_M} dx sqrt(E^2 - 4 U V) / U.
//!
//! In the symmetric gauge U = V = w; a change of gauge rescales dx and
//! U V together, so n(E) is gauge invariant.  Differentiating in E
//! returns the orbit period, 2 pi hbar dn/dE = T_E, which the tests use
//! to tie this module to the dynamics layer.  The [`abel`] submodule
//! runs the area integral in reverse, reconstructing a profile from a
//! counting function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::turning_points;
use crate::error::{Error, Result};
use crate::models::{ModelSpec, XpModel};
use crate::numerics::elliptic::elliptic_ke;
use crate::numerics::quadrature::{integrate, integrate_split, Hint, Tol};

pub mod abel;

pub use abel::{
    abel_invert_standard, abel_invert_xp, linear_log_profile, mussardo_profile,
    recover_linear_term, wu_sprung_profile, wu_sprung_v0, InversionResult, ProfileFamily,
};

/// Default density of the geometric grids used for counting curves and
/// inversion profiles; counting functions are smooth on a log scale.
pub const GRID_POINTS_PER_DECADE: usize = 200;

/// Number of states below energy E, by quadrature of the enclosed
/// phase-space area.  Negative energies mirror positive ones.  At the
/// threshold |E| = 2 min w the orbit has zero area and the count is 0;
/// below it there is no orbit and the call fails.
pub fn count_states(model: &XpModel, e: f64) -> Result<f64> {
    let ea = e.abs();
    let threshold = 2.0 * model.w_min().value;
    if ea == threshold {
        return Ok(0.0);
    }
    let tp = turning_points(model, e)?;
    let norm = 2.0 * PI * model.hbar();
    if let ModelSpec::Power { amp, exponent, lower } = model.spec() {
        if *lower == 0.0 {
            // The measure dx/w diverges like x^(-alpha) at the wall.
            // Substituting y = x^(1-alpha) turns it into a constant,
            // dx/w = dy / (amp (1-alpha)), leaving only the square-root
            // turning point handled by the endpoint hint.
            let (a, al) = (*amp, *exponent);
            let y_m = tp.upper.powf(1.0 - al);
            let q = integrate(
                |y: f64| {
                    let w = a * y.powf(al / (1.0 - al));
                    (ea * ea - 4.0 * w * w).max(0.0).sqrt()
                },
                0.0,
                y_m,
                Tol::default(),
                Hint::InverseSqrtUpper,
            )?;
            return Ok(q.value / (norm * a * (1.0 - al)));
        }
    }
    let f = |x: f64| {
        let u = model.u2(x).unwrap_or(f64::NAN);
        let v = model.v2(x).unwrap_or(f64::NAN);
        (ea * ea - 4.0 * u * v).max(0.0).sqrt() / u
    };
    let lower_hint = if tp.smooth_lower { Hint::InverseSqrtLower } else { Hint::None };
    let q = integrate_split(f, tp.lower, tp.upper, Tol::default(), lower_hint, Hint::InverseSqrtUpper)?;
    Ok(q.value / norm)
}

/// Closed-form count for the kinds that admit one: linear,
/// berry-keating (complete elliptic integrals), and cosh (a shifted
/// harmonic ladder).  Other kinds are a usage error.
pub fn count_closed(model: &XpModel, e: f64) -> Result<f64> {
    let ea = e.abs();
    let hbar = model.hbar();
    match model.spec() {
        ModelSpec::Linear { alpha, h } => {
            let w0 = alpha * h;
            require_orbit(e, ea, 2.0 * w0)?;
            let r = 2.0 * w0 / ea;
            Ok(ea / (2.0 * PI * hbar * alpha) * ((ea / (2.0 * w0)).acosh() - (1.0 - r * r).sqrt()))
        }
        ModelSpec::BerryKeating { h } => {
            require_orbit(e, ea, 4.0 * h)?;
            let m = 1.0 - (4.0 * h / ea).powi(2);
            let (k, ee) = elliptic_ke(m)?;
            Ok(ea / (2.0 * PI * hbar) * (k - ee))
        }
        ModelSpec::Cosh { w0, mu } => {
            require_orbit(e, ea, 2.0 * w0)?;
            // Equivalently E/(hbar omega) - mu with omega = 2 w0/(mu hbar).
            Ok(mu * (ea / (2.0 * w0) - 1.0))
        }
        other => Err(Error::Domain(format!(
            "kind '{}' has no closed-form count",
            other.kind_name()
        ))),
    }
}

fn require_orbit(e: f64, ea: f64, threshold: f64) -> Result<()> {
    if ea < threshold {
        return Err(Error::NoOrbit { energy: e, threshold });
    }
    Ok(())
}

/// Where a counting curve's samples came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSource {
    Quadrature,
    ClosedForm,
    External,
}

impl CurveSource {
    fn as_str(self) -> &'static str {
        match self {
            CurveSource::Quadrature => "quadrature",
            CurveSource::ClosedForm => "closed-form",
            CurveSource::External => "external",
        }
    }

    fn parse(text: &str) -> Result<CurveSource> {
        match text {
            "quadrature" => Ok(CurveSource::Quadrature),
            "closed-form" => Ok(CurveSource::ClosedForm),
            "external" => Ok(CurveSource::External),
            other => Err(Error::Domain(format!("unknown curve source '{other}'"))),
        }
    }
}

/// A sampled counting function n(E).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountingCurve {
    pub samples: Vec<(f64, f64)>,
    pub source: CurveSource,
    pub hbar: f64,
}

impl CountingCurve {
    /// Validates the defining invariants: energies strictly ascending,
    /// counts non-negative and non-decreasing (up to quadrature jitter).
    pub fn new(samples: Vec<(f64, f64)>, source: CurveSource, hbar: f64) -> Result<CountingCurve> {
        if samples.is_empty() {
            return Err(Error::Domain("counting curve needs at least one sample".into()));
        }
        for pair in samples.windows(2) {
            let ((e0, n0), (e1, n1)) = (pair[0], pair[1]);
            if !(e1 > e0) {
                return Err(Error::Domain(format!(
                    "counting curve energies must ascend: {e1} after {e0}"
                )));
            }
            if n1 < n0 - 1e-9 * (1.0 + n0.abs()) {
                return Err(Error::Domain(format!(
                    "counting curve must be non-decreasing: n({e1}) = {n1} after n({e0}) = {n0}"
                )));
            }
        }
        for &(e, n) in &samples {
            if !e.is_finite() || !n.is_finite() || n < -1e-9 {
                return Err(Error::Domain(format!("bad counting sample ({e}, {n})")));
            }
        }
        Ok(CountingCurve { samples, source, hbar })
    }

    /// Samples `count_states` over the given energies.
    pub fn by_quadrature(model: &XpModel, energies: &[f64]) -> Result<CountingCurve> {
        let mut samples = Vec::with_capacity(energies.len());
        for &e in energies {
            samples.push((e, count_states(model, e)?));
        }
        CountingCurve::new(samples, CurveSource::Quadrature, model.hbar())
    }

    /// Two-column CSV with a comment header.  Values use the shortest
    /// round-tripping decimal form, so parsing restores them exactly.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# source={}\n# hbar={}\n", self.source.as_str(), self.hbar);
        for &(e, n) in &self.samples {
            out.push_str(&format!("{e},{n}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<CountingCurve> {
        let (samples, header) = parse_two_column_csv(text)?;
        let source = match header.iter().find(|(k, _)| k == "source") {
            Some((_, v)) => CurveSource::parse(v)?,
            None => return Err(Error::Domain("curve CSV is missing the '# source=' header".into())),
        };
        let hbar = match header.iter().find(|(k, _)| k == "hbar") {
            Some((_, v)) => v
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("bad hbar '{v}' in curve CSV header")))?,
            None => 1.0,
        };
        CountingCurve::new(samples, source, hbar)
    }
}

/// Shared CSV scaffolding: `# key=value` comment lines followed by
/// `a,b` rows.  Returns the rows and the header pairs.
pub(crate) fn parse_two_column_csv(text: &str) -> Result<(Vec<(f64, f64)>, Vec<(String, String)>)> {
    let mut rows = Vec::new();
    let mut header = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.trim().split_once('=') {
                header.push((key.trim().to_string(), value.trim().to_string()));
            }
            continue;
        }
        let mut fields = line.split(',');
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(Error::Domain(format!(
                    "CSV line {}: expected two comma-separated values, got '{line}'",
                    idx + 1
                )))
            }
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Domain(format!("CSV line {}: bad number '{s}'", idx + 1)))
        };
        rows.push((parse(a)?, parse(b)?));
    }
    Ok((rows, header))
}

/// Geometric grid from `lo` to `hi` inclusive, `per_decade` points per
/// factor of ten.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || per_decade == 0 {
        return Err(Error::Domain(format!(
            "geometric grid needs 0 < lo < hi and a positive density, got [{lo}, {hi}]"
        )));
    }
    let decades = (hi / lo).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    let mut grid = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        grid.push(lo * (hi / lo).powf(t));
    }
    grid[0] = lo;
    grid[count - 1] = hi;
    Ok(grid)
}

/// Log-log least-squares fit of the counting function of a power
/// profile.  The flag is set when the samples visibly bend away from a
/// single power law.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest |log n - fit| over the sample, in log units.
    pub max_residual: f64,
    pub flagged: bool,
}

const POWER_FIT_RESIDUAL_FLAG: f64 = 0.05;

/// Fits log n(E) against log E over a geometric grid of `samples`
/// energies in [e_lo, e_hi].  For exponent alpha < 1 the count scales
/// as E^(1/alpha); for alpha > 1 a hard wall carries the leading area
/// and the slope tends to 1 from below.
pub fn power_law_scaling(
    model: &XpModel,
    e_lo: f64,
    e_hi: f64,
    samples: usize,
) -> Result<PowerLawFit> {
    if !matches!(model.spec(), ModelSpec::Power { .. }) {
        return Err(Error::Domain(format!(
            "power_law_scaling expects a power profile, got '{}'",
            model.kind_name()
        )));
    }
    if samples < 3 {
        return Err(Error::Domain("power-law fit needs at least 3 samples".into()));
    }
    if !(e_lo > 0.0 && e_hi > e_lo) {
        return Err(Error::Domain(format!("bad fit range [{e_lo}, {e_hi}]")));
    }
    let energies: Vec<f64> = (0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            e_lo * (e_hi / e_lo).powf(t)
        })
        .collect();
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for &e in &energies {
        let n = count_states(model, e)?;
        if n <= 0.0 {
            return Err(Error::Domain(format!(
                "count at E = {e} is not positive; move the range away from threshold"
            )));
        }
        xs.push(e.ln());
        ys.push(n.ln());
    }
    let m = samples as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    Ok(PowerLawFit { slope, intercept, max_residual, flagged: max_residual > POWER_FIT_RESIDUAL_FLAG })
}
