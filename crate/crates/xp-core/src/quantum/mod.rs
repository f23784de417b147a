//! Quantum spectra of H = U p + V/p on the half line.
//!
//! The normal-ordered operator acts as
//!
//!   (H psi)(x) = -i hbar u(x) d/dx (u(x) psi(x))
//!                - i hbar^{-1} v(x) int_x^inf dy v(y) psi(y),
//!
//! with u^2 = U and v^2 = V.  It is symmetric exactly on wavefunctions
//! obeying the nonlocal wall condition
//!
//!   e^{i theta} hbar u(x0) psi(x0) + hbar^{-1} int v psi = 0,
//!
//! one condition per angle theta, each angle a distinct self-adjoint
//! extension with its own spectrum.  In the symmetric gauge (coordinate z,
//! profile w) the eigenvalue problem becomes the local second-order
//! equation
//!
//!   hbar d/dz (hbar phi' - i E phi / w(z)) - phi = 0,   z >= z0,
//!
//! plus the boundary functional e^{i theta} phi(z0)
//! + hbar^{-2} int phi = 0.  This module solves it three ways: in closed
//! form for w(z) = z, where the solutions are modified Bessel functions
//! ([`model_i_spectrum`]); by inward shooting for general growing
//! profiles ([`shoot::shoot_spectrum`]); and exactly for constant w,
//! where the spectrum is a continuum plus at most one bound state
//! ([`constant::constant_model_spectrum`]).
//!
//! Two spectral facts hold across all of them.  At theta = 0 or pi the
//! eigenvalues come in time-reversed pairs {E, -E}, and at theta = pi
//! (and only there) the wall condition additionally admits the zero
//! mode phi_0 = e^{-z/hbar}, normalizable whenever its norm integral
//! converges ([`zero_mode`]).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{make_model, ModelSpec, XpModel};
use crate::numerics::bessel::bessel_k;
use crate::numerics::quadrature::{integrate, Hint, Tol};
use crate::numerics::roots::{find_root, scan_brackets};

pub mod constant;
pub mod shoot;

pub use constant::{
    constant_model_scattering, constant_model_spectrum, orthonormality_check,
    OrthonormalityReport, ScatteringState,
};
pub use shoot::shoot_spectrum;

/// Two angles within this distance are the same extension; used to
/// recognize the exact points theta = 0 and theta = pi.
const ANGLE_TOL: f64 = 1e-9;

/// A self-adjoint extension, named by its angle normalized into [0, 2 pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Extension {
    theta: f64,
}

impl Extension {
    pub fn new(theta: f64) -> Result<Extension> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!(
                "extension angle must be finite, got {theta}"
            )));
        }
        let mut t = theta.rem_euclid(2.0 * PI);
        if t >= 2.0 * PI {
            // rem_euclid can round up to the modulus itself for tiny
            // negative inputs.
            t = 0.0;
        }
        Ok(Extension { theta: t })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_zero(&self) -> bool {
        self.theta <= ANGLE_TOL || self.theta >= 2.0 * PI - ANGLE_TOL
    }

    pub fn is_pi(&self) -> bool {
        (self.theta - PI).abs() <= ANGLE_TOL
    }

    /// True for the two extensions whose spectra pair E with -E.
    pub fn mirror_symmetric(&self) -> bool {
        self.is_zero() || self.is_pi()
    }
}

impl TryFrom<f64> for Extension {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Extension> {
        Extension::new(theta)
    }
}

impl From<Extension> for f64 {
    fn from(e: Extension) -> f64 {
        e.theta
    }
}

/// One discrete eigenvalue with the secular residual left at acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub e: f64,
    pub residual: f64,
}

/// Spectrum of one extension: discrete eigenvalues in ascending order,
/// the squared norm of the theta = pi zero mode when that mode exists,
/// and the continuum edges when the spectrum has a continuum part.
/// `flagged` holds shooting candidates whose secular minimum was too
/// shallow to certify; they are reported, never merged into
/// `eigenvalues`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub theta: Extension,
    pub hbar: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<ModelSpec>,
    pub eigenvalues: Vec<Eigenvalue>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zero_mode: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub continuum: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub flagged: Vec<Eigenvalue>,
}

impl SpectrumResult {
    /// Three-column CSV (index, E, residual) under `# key=value` headers,
    /// matching the other result writers in this crate.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# theta={}\n# hbar={}\n", self.theta.theta(), self.hbar);
        if let Some(m) = &self.model {
            out.push_str(&format!("# model={}\n", m.kind_name()));
        }
        if let Some(n) = self.zero_mode {
            out.push_str(&format!("# zero_mode={n}\n"));
        }
        if let Some((lo, hi)) = self.continuum {
            out.push_str(&format!("# continuum={lo},{hi}\n"));
        }
        for (i, ev) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", ev.e, ev.residual));
        }
        out
    }
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {value}")))
    }
}

/// Bessel order nu = 1/2 - i E / (2 hbar) of the w(z) = z eigenproblem.
fn model_i_order(e: f64, hbar: f64) -> Complex64 {
    Complex64::new(0.5, -0.5 * e / hbar)
}

/// Real secular function of the w(z) = z model, whose zeros are the
/// eigenvalues of the extension theta:
///
///   g(E) = 2 Re( e^{i theta / 2} K_nu(z0 / hbar) ),
///
/// with nu = 1/2 - i E / (2 hbar).  The eigenvalue condition proper is
/// the complex equation e^{i theta} K_nu + K_{nu - 1} = 0 at argument
/// z0 / hbar; since the argument is real and Re nu = 1/2, the second
/// Bessel term is the conjugate of the first, and the condition equals
/// e^{i theta / 2} g(E).  The reduction to a real function is therefore
/// exact, not merely zero-preserving, and root-finding can stay real.
pub fn model_i_secular(e: f64, z0: f64, theta: f64, hbar: f64) -> Result<f64> {
    check_positive(z0, "wall position z0")?;
    check_positive(hbar, "hbar")?;
    let ext = Extension::new(theta)?;
    let k = bessel_k(model_i_order(e, hbar), z0 / hbar, Tol::default())?;
    Ok(2.0 * (Complex64::from_polar(1.0, 0.5 * ext.theta()) * k).re)
}

/// Residual of the complex eigenvalue condition at energy E, relative to
/// |K_nu|, with both Bessel orders evaluated independently.  Tests and
/// the spectrum builder use it to certify roots of the real reduction
/// against the unreduced condition.
fn model_i_raw_residual(e: f64, z0: f64, theta: f64, hbar: f64) -> Result<f64> {
    let nu = model_i_order(e, hbar);
    let z = z0 / hbar;
    let k = bessel_k(nu, z, Tol::default())?;
    let km1 = bessel_k(nu - 1.0, z, Tol::default())?;
    let raw = (Complex64::from_polar(1.0, theta) * k + km1).norm();
    Ok(raw / (k.norm() + f64::MIN_POSITIVE))
}

/// Scan step for eigenvalue searches: a fixed fraction of the local mean
/// level spacing 2 pi hbar / log(E / z0), capped at hbar so the sparse
/// low-energy region is still walked safely.
fn model_i_scan_step(e: f64, z0: f64, hbar: f64) -> f64 {
    let log = (e.abs() / z0).ln();
    hbar * (0.5 * PI / log.max(1.0)).min(1.0)
}

/// All eigenvalues of the w(z) = z model on (z0, inf) with |E| <= e_max.
///
/// Positive roots of [`model_i_secular`] are located by sign-change
/// scanning with the level-spacing step and refined by bracketed root
/// finding.  For theta = 0 or pi the negative eigenvalues are the exact
/// mirrors of the positive ones; for any other angle the negative axis
/// is scanned separately, since the pairing symmetry is then broken.
/// At theta = pi the E = 0 zero mode exists whenever its norm converges
/// (always, here); it is reported in `zero_mode`, not as an eigenvalue.
/// Each accepted root carries the raw complex-condition residual.
pub fn model_i_spectrum(z0: f64, theta: f64, e_max: f64, hbar: f64) -> Result<SpectrumResult> {
    check_positive(z0, "wall position z0")?;
    check_positive(e_max, "scan limit e_max")?;
    check_positive(hbar, "hbar")?;
    let ext = Extension::new(theta)?;

    let refine = |bracket| find_root(|e| model_i_secular(e, z0, ext.theta(), hbar).unwrap_or(f64::NAN), bracket, 1e-12);
    let scan = |lo: f64, hi: f64| -> Result<Vec<f64>> {
        let brackets = scan_brackets(
            |e| model_i_secular(e, z0, ext.theta(), hbar).unwrap_or(f64::NAN),
            lo,
            hi,
            |e| model_i_scan_step(e, z0, hbar),
        )?;
        brackets.into_iter().map(refine).collect()
    };

    // The scan starts a hair above zero: E = 0 is never a plain
    // eigenvalue (at theta = pi it is the zero mode, handled below).
    let eps = 1e-9 * hbar;
    let mut eigenvalues = Vec::new();
    if e_max > eps {
        for e in scan(eps, e_max)? {
            eigenvalues.push(Eigenvalue { e, residual: model_i_raw_residual(e, z0, ext.theta(), hbar)? });
        }
    }
    if ext.mirror_symmetric() {
        let mirrored: Vec<Eigenvalue> = eigenvalues
            .iter()
            .rev()
            .map(|ev| Eigenvalue { e: -ev.e, residual: ev.residual })
            .collect();
        eigenvalues.splice(0..0, mirrored);
    } else if e_max > eps {
        let mut negatives = Vec::new();
        for e in scan(-e_max, -eps)? {
            negatives.push(Eigenvalue { e, residual: model_i_raw_residual(e, z0, ext.theta(), hbar)? });
        }
        eigenvalues.splice(0..0, negatives);
    }

    let model = make_model(ModelSpec::Linear { alpha: 1.0, h: z0 }, hbar)?;
    Ok(SpectrumResult {
        theta: ext,
        hbar,
        model: Some(model.spec().clone()),
        eigenvalues,
        zero_mode: zero_mode(&model, ext.theta())?,
        continuum: None,
        flagged: Vec::new(),
    })
}

/// Eigenfunction samples of the w(z) = z model, in the symmetric gauge
/// and up to overall normalization.  `asymptotic_from` records the
/// smallest grid point whose value came from the large-argument tail
/// form instead of the Bessel integral.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub zs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub asymptotic_from: Option<f64>,
}

/// Scaled argument beyond which the eigenfunction switches to the
/// asymptotic tail.  There K carries a factor e^{-z/hbar} < 1e-260, so
/// the switch only ever touches values that are exponentially dead.
const EIGENFUNCTION_TAIL: f64 = 600.0;

/// phi(z) = zeta^{1 - nu} K_nu(zeta) with zeta = z / hbar, the decaying
/// solution of the w(z) = z eigenproblem.  In the classically allowed
/// region z0 < z << E/2 its gauge image psi = phi / sqrt(z) oscillates
/// under a z^{-1/2} envelope; beyond the turning point z = E/2 it dies
/// like e^{-z/hbar}.  Deep in that dead zone (zeta > 600) the values
/// switch to the leading tail form with its first correction, flagged
/// through `asymptotic_from`.
pub fn model_i_eigenfunction(
    e: f64,
    z0: f64,
    hbar: f64,
    zs: &[f64],
) -> Result<Eigenfunction> {
    check_positive(z0, "wall position z0")?;
    check_positive(hbar, "hbar")?;
    let nu = model_i_order(e, hbar);
    let mut values = Vec::with_capacity(zs.len());
    let mut asymptotic_from: Option<f64> = None;
    for &z in zs {
        if !z.is_finite() || z < z0 {
            return Err(Error::Domain(format!(
                "grid point {z} is outside the domain [{z0}, inf)"
            )));
        }
        let zeta = z / hbar;
        let power = (Complex64::new(1.0, 0.0) - nu) * zeta.ln();
        let value = if zeta <= EIGENFUNCTION_TAIL {
            power.exp() * bessel_k(nu, zeta, Tol::default())?
        } else {
            if !asymptotic_from.is_some_and(|prev| prev <= z) {
                asymptotic_from = Some(z);
            }
            // K_nu(zeta) ~ sqrt(pi / 2 zeta) e^{-zeta} (1 + (4 nu^2 - 1) / (8 zeta));
            // the zeta^{1-nu} prefactor cancels the root into a pure phase.
            let correction = Complex64::new(1.0, 0.0) + (4.0 * nu * nu - 1.0) / (8.0 * zeta);
            let phase = Complex64::new(0.0, 0.5 * e / hbar * zeta.ln()).exp();
            (0.5 * PI).sqrt() * phase * (-zeta).exp() * correction
        };
        values.push(value);
    }
    Ok(Eigenfunction { zs: zs.to_vec(), values, asymptotic_from })
}

/// Squared norm of the E = 0 mode phi_0 = e^{-z/hbar}, present exactly at
/// theta = pi.
///
/// At zero energy the symmetric-gauge equation degenerates to
/// hbar^2 phi'' = phi independently of the profile, and of its two
/// solutions only e^{-z/hbar} decays.  The wall condition accepts it
/// only at theta = pi, so every other angle returns `None`.  The norm
/// carries the gauge measure dz / w(z):
///
///   |phi_0|^2 = int_{z0}^inf e^{-2 z / hbar} / w(z) dz,
///
/// evaluated after mapping to a unit-rate exponential tail.  A profile
/// window that ends at finite z breaks the wall condition's integral and
/// the mode with it, so finite-window models are rejected.
pub fn zero_mode(model: &XpModel, theta: f64) -> Result<Option<f64>> {
    if !model.is_symmetric() {
        return Err(Error::Domain(format!(
            "the zero mode lives in the symmetric gauge; reduce '{}' first",
            model.kind_name()
        )));
    }
    let ext = Extension::new(theta)?;
    if !ext.is_pi() {
        return Ok(None);
    }
    let (z0, hi) = model.domain();
    if hi.is_finite() {
        return Err(Error::Domain(
            "the zero mode needs the full half line; a finite profile window truncates \
             the wall condition"
                .into(),
        ));
    }
    let hbar = model.hbar();
    // Substitute z = z0 + hbar t / 2 and pull the wall value of the
    // exponential out front, so the quadrature sees a unit-rate tail of
    // size 1/w and its tolerances act relative to the norm, however
    // small e^{-2 z0 / hbar} makes it.
    let integrand = |t: f64| (-t).exp() / model.w(z0 + 0.5 * hbar * t).unwrap_or(f64::NAN);
    let q = integrate(integrand, 0.0, f64::INFINITY, Tol::default(), Hint::ExpTail)
        .map_err(|err| match err {
            Error::QuadratureDiverged { .. } => Error::Divergent(format!(
                "zero-mode norm integral for '{}' did not converge",
                model.kind_name()
            )),
            other => other,
        })?;
    Ok(Some(0.5 * hbar * (-2.0 * z0 / hbar).exp() * q.value))
}
