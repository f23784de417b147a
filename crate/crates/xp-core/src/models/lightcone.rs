//! Light-cone coordinates for the spacetime picture of a model.
//!
//! A chart is a pair of null coordinates (x+, x-) built from chart
//! functions f, g through t = f(x+) and P(x) = f(x+) + g(x-), where
//! P is the p-gauge coordinate (the integral of 1/w from the wall).
//! The metric is (ds)^2 = -exp(2 chi) dx+ dx- with
//! exp(2 chi) = 4 w(x)^2 f'(x+) g'(x-).
//!
//! Three charts cover the catalog: an exponential chart that makes the
//! linear model manifestly flat, the trivial chart for the constant
//! model, and the identity chart (f = g = id) that works for any
//! symmetric model.

use crate::error::{Error, Result};
use crate::models::gauge::{to_p_gauge, GaugeMap};
use crate::models::{ModelSpec, XpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// f = g = ln(z) / (2 alpha); linear model only.  The wall maps to
    /// the hyperbola x+ x- = 1 and exp(chi) = h everywhere.
    FlatLinear,
    /// f = g = id for the constant model; exp(chi) = 2c.
    FlatConstant,
    /// f = g = id for any symmetric model; exp(2 chi) = 4 w(x)^2.
    GenericIdentity,
}

pub struct LightconeChart {
    model: XpModel,
    kind: ChartKind,
    pmap: Option<GaugeMap>,
    /// P at the upper domain edge, when the domain is finite.
    q_max: Option<f64>,
}

impl LightconeChart {
    /// Build a chart; `kind = None` picks the natural chart for the
    /// model.  Generic-gauge models must be reduced to the symmetric
    /// gauge first.
    pub fn new(model: &XpModel, kind: Option<ChartKind>) -> Result<LightconeChart> {
        if !model.is_symmetric() {
            return Err(Error::Domain(
                "light-cone charts need the symmetric gauge; reduce the model first".into(),
            ));
        }
        let kind = kind.unwrap_or(match model.spec() {
            ModelSpec::Linear { .. } => ChartKind::FlatLinear,
            ModelSpec::Constant { .. } => ChartKind::FlatConstant,
            _ => ChartKind::GenericIdentity,
        });
        match (kind, model.spec()) {
            (ChartKind::FlatLinear, ModelSpec::Linear { .. }) => {}
            (ChartKind::FlatConstant, ModelSpec::Constant { .. }) => {}
            (ChartKind::GenericIdentity, _) => {}
            (k, _) => {
                return Err(Error::Domain(format!(
                    "chart {k:?} does not apply to model '{}'",
                    model.kind_name()
                )))
            }
        }
        // Closed forms below cover the two flat charts; only the generic
        // chart needs the quadrature-based p-gauge map.
        let pmap = match kind {
            ChartKind::GenericIdentity
                if !matches!(
                    model.spec(),
                    ModelSpec::Linear { .. } | ModelSpec::Constant { .. }
                ) =>
            {
                Some(to_p_gauge(model)?.map)
            }
            _ => None,
        };
        let q_max = {
            let (_, hi) = model.domain();
            if hi.is_finite() {
                Some(Self::p_of(model, &pmap, hi)?)
            } else {
                None
            }
        };
        Ok(LightconeChart { model: model.clone(), kind, pmap, q_max })
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    fn p_of(model: &XpModel, pmap: &Option<GaugeMap>, x: f64) -> Result<f64> {
        match model.spec() {
            ModelSpec::Linear { alpha, h } => {
                model.check_x(x)?;
                Ok((x / h).ln() / alpha)
            }
            ModelSpec::Constant { c } => {
                model.check_x(x)?;
                Ok(x / c)
            }
            _ => pmap.as_ref().unwrap().forward(x),
        }
    }

    fn p_inv(&self, q: f64) -> Result<f64> {
        if q < -1e-12 {
            return Err(Error::Domain(format!("event lies behind the wall (P = {q})")));
        }
        if let Some(q_max) = self.q_max {
            if q > q_max * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "event outside the tabulated window (P = {q} > {q_max})"
                )));
            }
        }
        let q = q.max(0.0);
        match self.model.spec() {
            ModelSpec::Linear { alpha, h } => Ok(h * (alpha * q).exp()),
            ModelSpec::Constant { c } => Ok(c * q),
            _ => self.pmap.as_ref().unwrap().inverse(q),
        }
    }

    fn f(&self, z: f64) -> Result<f64> {
        match self.kind {
            ChartKind::FlatLinear => {
                let ModelSpec::Linear { alpha, .. } = self.model.spec() else { unreachable!() };
                if z <= 0.0 {
                    return Err(Error::Domain(format!("null coordinate {z} must be positive")));
                }
                Ok(z.ln() / (2.0 * alpha))
            }
            _ => Ok(z),
        }
    }

    fn f_inv(&self, t: f64) -> f64 {
        match self.kind {
            ChartKind::FlatLinear => {
                let ModelSpec::Linear { alpha, .. } = self.model.spec() else { unreachable!() };
                (2.0 * alpha * t).exp()
            }
            _ => t,
        }
    }

    fn f_prime(&self, z: f64) -> Result<f64> {
        match self.kind {
            ChartKind::FlatLinear => {
                let ModelSpec::Linear { alpha, .. } = self.model.spec() else { unreachable!() };
                if z <= 0.0 {
                    return Err(Error::Domain(format!("null coordinate {z} must be positive")));
                }
                Ok(1.0 / (2.0 * alpha * z))
            }
            _ => Ok(1.0),
        }
    }

    /// Map an event (t, x) to null coordinates: x+ = f^{-1}(t) and
    /// x- = g^{-1}(P(x) - t).
    pub fn from_spacetime(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let q = Self::p_of(&self.model, &self.pmap, x)?;
        Ok((self.f_inv(t), self.f_inv(q - t)))
    }

    /// Map null coordinates back to (t, x).
    pub fn to_spacetime(&self, xp: f64, xm: f64) -> Result<(f64, f64)> {
        let t = self.f(xp)?;
        let q = t + self.f(xm)?;
        Ok((t, self.p_inv(q)?))
    }

    /// True when (x+, x-) lies in the chart image of the model domain.
    pub fn contains(&self, xp: f64, xm: f64) -> bool {
        match self.kind {
            ChartKind::FlatLinear => xp > 0.0 && xm > 0.0 && xp * xm >= 1.0 - 1e-12,
            _ => {
                let q = xp + xm;
                q >= -1e-12 && self.q_max.map_or(true, |qm| q <= qm * (1.0 + 1e-12))
            }
        }
    }

    /// exp(2 chi) at an event, i.e. 4 w(x)^2 f'(x+) g'(x-).
    pub fn conformal_factor(&self, xp: f64, xm: f64) -> Result<f64> {
        let (_, x) = self.to_spacetime(xp, xm)?;
        let w = self.model.w(x)?;
        Ok(4.0 * w * w * self.f_prime(xp)? * self.f_prime(xm)?)
    }

    /// The squared interval -exp(2 chi) dx+ dx- of a small displacement.
    pub fn line_element(&self, xp: f64, xm: f64, dxp: f64, dxm: f64) -> Result<f64> {
        Ok(-self.conformal_factor(xp, xm)? * dxp * dxm)
    }
}
