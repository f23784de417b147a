//! Comparison of computed spectra against tabulated zeta zeros.
//!
//! The dictionary between an xp spectrum and the zeros has three knobs:
//! a slope alpha, the Planck constant, and the wall position z0, whose
//! natural value 2 pi hbar makes the semiclassical count of the linear
//! model line up with the smooth zero count.  An eigenvalue E is mapped
//! to the ordinate t = E / (hbar alpha) and compared against the smooth
//! counting formula
//!
//!   N(t) = (t / 2 pi) (log(t / 2 pi) - 1) + 7/8 ,
//!
//! leaving per-eigenvalue offsets N(t_n) - n.  The offsets do not tend
//! to zero: the two counting constants differ, so the comparison settles
//! at 11/8, and the report surfaces that number without interpretation.
//! When a zeros table is supplied the report also carries, per
//! eigenvalue, the distance to the nearest tabulated zero and the
//! fluctuating part of the count (table count minus smooth count), the
//! piece no smooth profile reproduces.
//!
//! Zeros are external data, ingested from plain text tables; nothing in
//! this crate evaluates zeta.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::SpectrumResult;

/// Riemann-von Mangoldt smooth count of zeta zeros with ordinate in
/// (0, t]: (t / 2 pi)(log(t / 2 pi) - 1) + 7/8.  The fluctuating part
/// is deliberately not modeled.
pub fn smooth_zero_count(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("smooth zero count needs t > 0, got {t}")));
    }
    let x = t / (2.0 * PI);
    Ok(x * (x.ln() - 1.0) + 0.875)
}

/// An ascending table of zero ordinates t_n > 0, treated as opaque
/// external data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZerosTable {
    pub ordinates: Vec<f64>,
    pub source_path: String,
}

impl ZerosTable {
    /// Parse the plain-text table format: one decimal ordinate per line,
    /// `#` comment lines and blank lines ignored, strictly ascending,
    /// all positive.  Violations report the offending line number.
    pub fn parse(text: &str, source: &str) -> Result<ZerosTable> {
        let mut ordinates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let entry = raw.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            let t: f64 = entry.parse().map_err(|_| Error::ZerosFile {
                line,
                message: format!("not a decimal ordinate: {entry:?}"),
            })?;
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::ZerosFile {
                    line,
                    message: format!("ordinates must be positive, got {t}"),
                });
            }
            if let Some(&prev) = ordinates.last() {
                if t <= prev {
                    return Err(Error::ZerosFile {
                        line,
                        message: format!("ordinate {t} does not ascend past {prev}"),
                    });
                }
            }
            ordinates.push(t);
        }
        Ok(ZerosTable { ordinates, source_path: source.to_string() })
    }

    /// Number of tabulated zeros with ordinate at most t.
    pub fn count_below(&self, t: f64) -> usize {
        self.ordinates.partition_point(|&z| z <= t)
    }

    /// Distance from t to the nearest tabulated zero.
    pub fn nearest_distance(&self, t: f64) -> Option<f64> {
        let i = self.ordinates.partition_point(|&z| z < t);
        let after = self.ordinates.get(i).map(|z| (z - t).abs());
        let before = (i > 0).then(|| (self.ordinates[i - 1] - t).abs());
        match (before, after) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Read and validate a zeros table from a file.
pub fn load_zeros(path: impl AsRef<Path>) -> Result<ZerosTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ZerosTable::parse(&text, &path.display().to_string())
}

/// The dictionary mapping a spectrum onto zero ordinates: t = E / (hbar
/// alpha).  z0 records where the wall must sit for the counting to line
/// up; it is part of the identification, not of the arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub alpha: f64,
    pub hbar: f64,
    pub z0: f64,
}

impl Identification {
    /// Identification with the natural wall z0 = 2 pi hbar.
    pub fn new(alpha: f64, hbar: f64) -> Result<Identification> {
        let id = Identification { alpha, hbar, z0: 2.0 * PI * hbar };
        id.validate()?;
        Ok(id)
    }

    fn validate(&self) -> Result<()> {
        for (value, name) in [(self.alpha, "alpha"), (self.hbar, "hbar"), (self.z0, "z0")] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!(
                    "identification {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// One positive eigenvalue mapped onto the zero axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Zero-based index among the ascending positive eigenvalues.
    pub n: usize,
    pub e: f64,
    /// Mapped ordinate t = E / (hbar alpha).
    pub t: f64,
    pub smooth_count: f64,
    /// smooth_count - n; settles at 11/8 for the linear model at theta = 0.
    pub offset: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nearest_zero: Option<f64>,
    /// Table count at t minus the smooth count: the fluctuating part of
    /// the true counting function, shown only when a table is supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fluctuation: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OffsetSummary {
    pub mean_offset: f64,
    pub max_abs_offset: f64,
}

/// Spectrum-versus-zeros comparison under one identification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub identification: Identification,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zeros_source: Option<String>,
    pub per_eigenvalue: Vec<ComparisonRow>,
    pub summary: OffsetSummary,
}

impl ComparisonReport {
    /// CSV rows (n, E, t, smooth count, offset, and the two zero-table
    /// columns when present) under `# key=value` headers, matching the
    /// other result writers in this crate.
    pub fn to_csv(&self) -> String {
        let id = &self.identification;
        let mut out = format!("# alpha={}\n# hbar={}\n# z0={}\n", id.alpha, id.hbar, id.z0);
        if let Some(src) = &self.zeros_source {
            out.push_str(&format!("# zeros={src}\n"));
        }
        out.push_str(&format!(
            "# mean_offset={}\n# max_abs_offset={}\n",
            self.summary.mean_offset, self.summary.max_abs_offset
        ));
        for row in &self.per_eigenvalue {
            out.push_str(&format!(
                "{},{},{},{},{}",
                row.n, row.e, row.t, row.smooth_count, row.offset
            ));
            if let (Some(d), Some(f)) = (row.nearest_zero, row.fluctuation) {
                out.push_str(&format!(",{d},{f}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Map the positive eigenvalues of a spectrum onto zero ordinates and
/// report how the smooth count sees them.
///
/// Only positive eigenvalues are compared: the zeros come as positive
/// ordinates, and at the mirror-symmetric extensions the negative half
/// of the spectrum repeats the positive half with E -> -E.  An empty
/// zeros table is treated as no table, leaving the smooth comparison
/// alone.
pub fn compare_spectrum(
    spectrum: &SpectrumResult,
    zeros: Option<&ZerosTable>,
    ident: Identification,
) -> Result<ComparisonReport> {
    ident.validate()?;
    let table = zeros.filter(|z| !z.ordinates.is_empty());
    let mut per_eigenvalue = Vec::new();
    for ev in spectrum.eigenvalues.iter().filter(|ev| ev.e > 0.0) {
        let n = per_eigenvalue.len();
        let t = ev.e / (ident.hbar * ident.alpha);
        let smooth_count = smooth_zero_count(t)?;
        let offset = smooth_count - n as f64;
        if !offset.is_finite() {
            return Err(Error::Domain(format!("offset at E = {} is not finite", ev.e)));
        }
        per_eigenvalue.push(ComparisonRow {
            n,
            e: ev.e,
            t,
            smooth_count,
            offset,
            nearest_zero: table.and_then(|z| z.nearest_distance(t)),
            fluctuation: table.map(|z| z.count_below(t) as f64 - smooth_count),
        });
    }
    if per_eigenvalue.is_empty() {
        return Err(Error::Domain(
            "comparison needs at least one positive eigenvalue".into(),
        ));
    }
    let mean_offset =
        per_eigenvalue.iter().map(|r| r.offset).sum::<f64>() / per_eigenvalue.len() as f64;
    let max_abs_offset = per_eigenvalue.iter().map(|r| r.offset.abs()).fold(0.0, f64::max);
    Ok(ComparisonReport {
        identification: ident,
        zeros_source: table.map(|z| z.source_path.clone()),
        per_eigenvalue,
        summary: OffsetSummary { mean_offset, max_abs_offset },
    })
}
