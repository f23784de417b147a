//! Model catalog for Hamiltonians of the form H = U(x) p + V(x)/p.
//!
//! Every model lives on a half line with a hard wall at the lower edge
//! (or a finite window for tabulated data).  Most catalog entries are in
//! the symmetric gauge U = V = w(x); `model-iii` keeps distinct U and V
//! and is the worked example for gauge reduction.  All profile
//! evaluations are domain checked and return errors rather than NaNs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod curvature;
pub mod gauge;
pub mod lightcone;
pub mod tabulated;

use tabulated::MonotoneCubic;

pub const DEFAULT_HBAR: f64 = 1.0;

/// Parameter set for one catalog entry.  Serialized flat, e.g.
/// `{"kind":"linear","alpha":1.0,"h":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// w = alpha x on (h, inf).
    Linear { alpha: f64, h: f64 },
    /// w = x + h^2/x on (0, inf); the minimum 2h sits at x = h.
    BerryKeating { h: f64 },
    /// U = x + lx^2/x, V = lp^2 x on (0, inf); generic gauge.
    ModelIii { lx: f64, lp: f64 },
    /// w = c on (0, inf).
    Constant { c: f64 },
    /// w = w0 cosh(x / (2 mu hbar)) on (0, inf).
    Cosh { w0: f64, mu: f64 },
    /// w = alpha x + beta ln x on (h, inf).
    LinearLog { alpha: f64, beta: f64, h: f64 },
    /// w = amp x^exponent on (lower, inf).
    Power { amp: f64, exponent: f64, lower: f64 },
    /// Monotone cubic through (xs, ws) samples.
    Tabulated { xs: Vec<f64>, ws: Vec<f64> },
}

impl ModelSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::Linear { .. } => "linear",
            ModelSpec::BerryKeating { .. } => "berry-keating",
            ModelSpec::ModelIii { .. } => "model-iii",
            ModelSpec::Constant { .. } => "constant",
            ModelSpec::Cosh { .. } => "cosh",
            ModelSpec::LinearLog { .. } => "linear-log",
            ModelSpec::Power { .. } => "power",
            ModelSpec::Tabulated { .. } => "tabulated",
        }
    }

    /// Build a spec from a kind name and `name=value` parameters, filling
    /// unspecified parameters with catalog defaults.  Tabulated models are
    /// built from sample arrays instead and are rejected here.
    pub fn from_params(kind: &str, params: &HashMap<String, f64>) -> Result<ModelSpec> {
        let defaults: &[(&str, f64)] = match kind {
            "linear" => &[("alpha", 1.0), ("h", 1.0)],
            "berry-keating" => &[("h", 1.0)],
            "model-iii" => &[("lx", 1.0), ("lp", 1.0)],
            "constant" => &[("c", 1.0)],
            "cosh" => &[("w0", 1.0), ("mu", 1.0)],
            "linear-log" => &[("alpha", 1.0), ("beta", 1.0), ("h", 1.0)],
            "power" => &[("amp", 1.0), ("exponent", 2.0), ("lower", 1.0)],
            "tabulated" => {
                return Err(Error::Domain(
                    "tabulated models are built from a sample file, not parameters".into(),
                ))
            }
            other => {
                return Err(Error::Domain(format!(
                    "unknown model kind '{other}'; expected one of linear, berry-keating, \
                     model-iii, constant, cosh, linear-log, power, tabulated"
                )))
            }
        };
        for name in params.keys() {
            if !defaults.iter().any(|(n, _)| n == name) {
                return Err(Error::Domain(format!(
                    "model '{kind}' has no parameter '{name}'"
                )));
            }
        }
        let get = |name: &str| -> f64 {
            params
                .get(name)
                .copied()
                .unwrap_or_else(|| defaults.iter().find(|(n, _)| *n == name).unwrap().1)
        };
        Ok(match kind {
            "linear" => ModelSpec::Linear { alpha: get("alpha"), h: get("h") },
            "berry-keating" => ModelSpec::BerryKeating { h: get("h") },
            "model-iii" => ModelSpec::ModelIii { lx: get("lx"), lp: get("lp") },
            "constant" => ModelSpec::Constant { c: get("c") },
            "cosh" => ModelSpec::Cosh { w0: get("w0"), mu: get("mu") },
            "linear-log" => {
                ModelSpec::LinearLog { alpha: get("alpha"), beta: get("beta"), h: get("h") }
            }
            "power" => ModelSpec::Power {
                amp: get("amp"),
                exponent: get("exponent"),
                lower: get("lower"),
            },
            _ => unreachable!(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawModel {
    #[serde(flatten)]
    spec: ModelSpec,
    #[serde(default = "default_hbar")]
    hbar: f64,
}

fn default_hbar() -> f64 {
    DEFAULT_HBAR
}

/// Location and value of the profile minimum.  `interior` is true when the
/// minimum sits strictly inside the domain (so both turning points are
/// smooth), false when it is the wall value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WMin {
    pub value: f64,
    pub at: f64,
    pub interior: bool,
}

/// A validated model: parameter set plus hbar, with the tabulated
/// interpolant prebuilt.  Construct through [`make_model`] or serde.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct XpModel {
    spec: ModelSpec,
    hbar: f64,
    interp: Option<MonotoneCubic>,
}

impl TryFrom<RawModel> for XpModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<XpModel> {
        make_model(raw.spec, raw.hbar)
    }
}

impl From<XpModel> for RawModel {
    fn from(m: XpModel) -> RawModel {
        RawModel { spec: m.spec, hbar: m.hbar }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.into()))
    }
}

/// Validate a parameter set and attach hbar.
pub fn make_model(spec: ModelSpec, hbar: f64) -> Result<XpModel> {
    require(hbar.is_finite() && hbar > 0.0, "hbar must be positive")?;
    let mut interp = None;
    match &spec {
        ModelSpec::Linear { alpha, h } => {
            require(*alpha > 0.0, "linear: alpha must be positive")?;
            require(*h > 0.0, "linear: wall position h must be positive")?;
        }
        ModelSpec::BerryKeating { h } => {
            require(*h > 0.0, "berry-keating: h must be positive")?;
        }
        ModelSpec::ModelIii { lx, lp } => {
            require(*lx > 0.0, "model-iii: lx must be positive")?;
            require(*lp > 0.0, "model-iii: lp must be positive")?;
        }
        ModelSpec::Constant { c } => {
            require(*c > 0.0, "constant: c must be positive")?;
        }
        ModelSpec::Cosh { w0, mu } => {
            require(*w0 > 0.0, "cosh: w0 must be positive")?;
            require(*mu > 0.0, "cosh: mu must be positive")?;
        }
        ModelSpec::LinearLog { alpha, beta, h } => {
            require(*alpha > 0.0, "linear-log: alpha must be positive")?;
            require(*h > 0.0, "linear-log: wall position h must be positive")?;
            require(
                alpha * h + beta * h.ln() > 0.0,
                "linear-log: profile must be positive at the wall",
            )?;
            require(
                alpha + beta / h > 0.0,
                "linear-log: profile must be increasing at the wall",
            )?;
        }
        ModelSpec::Power { amp, exponent, lower } => {
            require(*amp > 0.0, "power: amp must be positive")?;
            require(*exponent > 0.0, "power: exponent must be positive")?;
            require(
                *exponent != 1.0,
                "power: exponent 1 duplicates the linear model; use kind 'linear'",
            )?;
            require(*lower >= 0.0, "power: lower edge must be nonnegative")?;
            if *exponent > 1.0 {
                require(
                    *lower > 0.0,
                    "power: exponent > 1 needs a positive lower edge, else the \
                     state count diverges",
                )?;
            }
        }
        ModelSpec::Tabulated { xs, ws } => {
            require(ws.iter().all(|w| *w > 0.0), "tabulated: profile samples must be positive")?;
            interp = Some(MonotoneCubic::new(xs.clone(), ws.clone())?);
        }
    }
    Ok(XpModel { spec, hbar, interp })
}

impl XpModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind_name(&self) -> &'static str {
        self.spec.kind_name()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// True when U = V = w, i.e. everything except `model-iii`.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.spec, ModelSpec::ModelIii { .. })
    }

    /// Domain as (lower, upper); upper is +inf except for tabulated data.
    pub fn domain(&self) -> (f64, f64) {
        match &self.spec {
            ModelSpec::Linear { h, .. } | ModelSpec::LinearLog { h, .. } => (*h, f64::INFINITY),
            ModelSpec::BerryKeating { .. }
            | ModelSpec::ModelIii { .. }
            | ModelSpec::Constant { .. }
            | ModelSpec::Cosh { .. } => (0.0, f64::INFINITY),
            ModelSpec::Power { lower, .. } => (*lower, f64::INFINITY),
            ModelSpec::Tabulated { .. } => {
                let c = self.interp.as_ref().unwrap();
                (c.lower(), c.upper())
            }
        }
    }

    /// The wall coordinate (lower domain edge).
    pub fn wall(&self) -> f64 {
        self.domain().0
    }

    pub(crate) fn check_x(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        // The wall itself is a valid evaluation point when the profile is
        // finite there; an open edge at the origin is not.
        let ok = if lo > 0.0 || matches!(self.spec, ModelSpec::Tabulated { .. } | ModelSpec::Power { .. })
        {
            x >= lo && x <= hi
        } else {
            x > lo && x <= hi
        };
        require(
            ok && x.is_finite(),
            &format!("x = {x} outside model domain ({lo}, {hi})"),
        )
    }

    /// Profile w(x) = sqrt(U V).
    pub fn w(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(match &self.spec {
            ModelSpec::Linear { alpha, h: _ } => alpha * x,
            ModelSpec::BerryKeating { h } => x + h * h / x,
            ModelSpec::ModelIii { lx, lp } => lp * (x * x + lx * lx).sqrt(),
            ModelSpec::Constant { c } => *c,
            ModelSpec::Cosh { w0, mu } => w0 * (x / (2.0 * mu * self.hbar)).cosh(),
            ModelSpec::LinearLog { alpha, beta, h: _ } => alpha * x + beta * x.ln(),
            ModelSpec::Power { amp, exponent, .. } => amp * x.powf(*exponent),
            ModelSpec::Tabulated { .. } => self.interp.as_ref().unwrap().eval(x)?,
        })
    }

    pub fn w_prime(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(match &self.spec {
            ModelSpec::Linear { alpha, .. } => *alpha,
            ModelSpec::BerryKeating { h } => 1.0 - h * h / (x * x),
            ModelSpec::ModelIii { lx, lp } => lp * x / (x * x + lx * lx).sqrt(),
            ModelSpec::Constant { .. } => 0.0,
            ModelSpec::Cosh { w0, mu } => {
                let s = 2.0 * mu * self.hbar;
                w0 * (x / s).sinh() / s
            }
            ModelSpec::LinearLog { alpha, beta, .. } => alpha + beta / x,
            ModelSpec::Power { amp, exponent, .. } => amp * exponent * x.powf(exponent - 1.0),
            ModelSpec::Tabulated { .. } => self.interp.as_ref().unwrap().deriv(x)?,
        })
    }

    pub fn w_second(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(match &self.spec {
            ModelSpec::Linear { .. } | ModelSpec::Constant { .. } => 0.0,
            ModelSpec::BerryKeating { h } => 2.0 * h * h / (x * x * x),
            ModelSpec::ModelIii { lx, lp } => {
                let r2 = x * x + lx * lx;
                lp * lx * lx / (r2 * r2.sqrt())
            }
            ModelSpec::Cosh { w0, mu } => {
                let s = 2.0 * mu * self.hbar;
                w0 * (x / s).cosh() / (s * s)
            }
            ModelSpec::LinearLog { beta, .. } => -beta / (x * x),
            ModelSpec::Power { amp, exponent, .. } => {
                amp * exponent * (exponent - 1.0) * x.powf(exponent - 2.0)
            }
            ModelSpec::Tabulated { .. } => self.interp.as_ref().unwrap().second_deriv(x)?,
        })
    }

    /// U(x), the coefficient of p.
    pub fn u2(&self, x: f64) -> Result<f64> {
        match &self.spec {
            ModelSpec::ModelIii { lx, .. } => {
                self.check_x(x)?;
                Ok(x + lx * lx / x)
            }
            _ => self.w(x),
        }
    }

    /// V(x), the coefficient of 1/p.
    pub fn v2(&self, x: f64) -> Result<f64> {
        match &self.spec {
            ModelSpec::ModelIii { lp, .. } => {
                self.check_x(x)?;
                Ok(lp * lp * x)
            }
            _ => self.w(x),
        }
    }

    /// d/dx of U(x).
    pub fn u2_prime(&self, x: f64) -> Result<f64> {
        match &self.spec {
            ModelSpec::ModelIii { lx, .. } => {
                self.check_x(x)?;
                Ok(1.0 - lx * lx / (x * x))
            }
            _ => self.w_prime(x),
        }
    }

    /// d/dx of V(x).
    pub fn v2_prime(&self, x: f64) -> Result<f64> {
        match &self.spec {
            ModelSpec::ModelIii { lp, .. } => {
                self.check_x(x)?;
                Ok(lp * lp)
            }
            _ => self.w_prime(x),
        }
    }

    /// v(x)/u(x) = sqrt(V/U); identically 1 in the symmetric gauge.
    pub fn v_over_u(&self, x: f64) -> Result<f64> {
        match &self.spec {
            ModelSpec::ModelIii { lx, lp } => {
                self.check_x(x)?;
                Ok(lp * x / (x * x + lx * lx).sqrt())
            }
            _ => {
                self.check_x(x)?;
                Ok(1.0)
            }
        }
    }

    /// Minimum of w over the closed domain (infimum for open edges).
    pub fn w_min(&self) -> WMin {
        match &self.spec {
            ModelSpec::Linear { alpha, h } => {
                WMin { value: alpha * h, at: *h, interior: false }
            }
            ModelSpec::BerryKeating { h } => WMin { value: 2.0 * h, at: *h, interior: true },
            ModelSpec::ModelIii { lx, lp } => WMin { value: lp * lx, at: 0.0, interior: false },
            ModelSpec::Constant { c } => WMin { value: *c, at: 0.0, interior: false },
            ModelSpec::Cosh { w0, .. } => WMin { value: *w0, at: 0.0, interior: false },
            ModelSpec::LinearLog { alpha, beta, h } => {
                WMin { value: alpha * h + beta * h.ln(), at: *h, interior: false }
            }
            ModelSpec::Power { amp, exponent, lower } => WMin {
                value: if *lower > 0.0 { amp * lower.powf(*exponent) } else { 0.0 },
                at: *lower,
                interior: false,
            },
            ModelSpec::Tabulated { .. } => {
                let (xs, ws) = self.interp.as_ref().unwrap().knots();
                let (mut at, mut value) = (xs[0], ws[0]);
                for (x, w) in xs.iter().zip(ws) {
                    if *w < value {
                        value = *w;
                        at = *x;
                    }
                }
                let interior = at > xs[0] && at < xs[xs.len() - 1];
                WMin { value, at, interior }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<XpModel> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("bad model JSON: {e}")))
    }
}
