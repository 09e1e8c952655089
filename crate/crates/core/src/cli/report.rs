//! Sweep and verification reports with their CSV and JSON encodings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::fields::ScalingFit;
use crate::geometry::Point;

use super::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub xi: f64,
    pub xi_scaled: f64,
    pub probes: Vec<f64>,
    pub energy: f64,
    /// `ε^{n-2} · energy`.
    pub eps_pow_scaled_energy: f64,
    pub iters: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub xi_tilde: f64,
    /// `|Σ w μ̃^i - Σ w g^o|`.
    pub compatibility_residual: f64,
    pub integral_nonzero: bool,
    pub sign_ok: bool,
    pub iters: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    /// `u` at the first probe against `ε`; absent when the values change sign or vanish.
    pub value: Option<ScalingFit>,
    pub energy: Option<ScalingFit>,
}

/// Differences against the closed forms, present for concentric unit spheres
/// with constant data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDeltas {
    /// `ξ̃` minus the radial limit root.
    pub xi_tilde: f64,
    /// Largest `|u - u_exact| / max(|u_exact|, 1)` over rows and probes (linear `F` only).
    pub probe_max: Option<f64>,
    /// Largest `|E - E_exact| / max(E_exact, 1)` over rows (linear `F` only).
    pub energy_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the effective configuration serialized as JSON.
    pub config_hash: String,
    pub tool_version: String,
    pub quad_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub probes: Vec<Point>,
    /// Sorted by descending `ε`.
    pub rows: Vec<SweepRow>,
    pub limit: LimitRow,
    pub fits: Fits,
    pub oracle: Option<OracleDeltas>,
    pub provenance: Provenance,
}

pub fn provenance(cfg: &RunConfig) -> Provenance {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    Provenance {
        config_hash: hex::encode(Sha256::digest(&canonical)),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        quad_order: cfg.quad_order,
    }
}

fn num(out: &mut String, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v };
    write!(out, "{v:.16e}").expect("writing to a string");
}

impl SweepReport {
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["eps".to_string(), "xi".into(), "xi_scaled".into()];
        cols.extend((1..=self.probes.len()).map(|k| format!("probe_{k}")));
        cols.extend(["energy", "eps_pow_scaled_energy", "iters", "residual"].map(String::from));
        cols.join(",")
    }

    /// Fixed-format CSV: 17 significant digits, `.` decimal point, LF line ends.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.rows {
            let fields = [r.eps, r.xi, r.xi_scaled]
                .into_iter()
                .chain(r.probes.iter().copied())
                .chain([r.energy, r.eps_pow_scaled_energy]);
            for (k, v) in fields.enumerate() {
                if k > 0 {
                    out.push(',');
                }
                num(&mut out, v);
            }
            write!(out, ",{},", r.iters).expect("writing to a string");
            num(&mut out, r.residual);
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `sweep.csv` and/or `report.json` into `dir`.
    pub fn write(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for f in formats {
            let (name, body) = match f {
                Format::Csv => ("sweep.csv", self.to_csv()),
                Format::Json => ("report.json", self.to_json()),
            };
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Checks the row-order and finiteness invariants.
    pub fn is_well_formed(&self) -> bool {
        let sorted = self.rows.windows(2).all(|w| w[0].eps > w[1].eps);
        let finite = self.rows.iter().all(|r| {
            [r.eps, r.xi, r.xi_scaled, r.energy, r.eps_pow_scaled_energy, r.residual]
                .iter()
                .chain(&r.probes)
                .all(|v| v.is_finite())
        });
        sorted && finite && self.limit.xi_tilde.is_finite() && self.limit.compatibility_residual.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured error.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
        }
    }

    /// `tolerance - value`; negative when the check failed.
    pub fn margin(&self) -> f64 {
        self.tolerance - self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub seed: u64,
    pub provenance: Provenance,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<5} {:<32} error {:.3e}  tolerance {:.1e}  margin {:+.3e}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.margin()
            );
        }
        s
    }
}
