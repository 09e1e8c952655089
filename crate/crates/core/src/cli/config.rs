//! Run configuration for the batch driver. TOML is the primary syntax; a
//! document whose first non-blank character is `{` is read as JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_surface, Point, SurfaceSpec};
use crate::system::{Datum, EpsFamily, NewtonOptions, Nonlinearity, PowerLaw, Problem, ProblemData};

/// Smallest quadrature order accepted by `run`.
pub const MIN_RUN_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub outer: SurfaceSpec,
    pub inner: SurfaceSpec,
    pub quad_order: usize,
    pub g_o: Datum,
    pub g_i: Datum,
    pub nonlinearity: Nonlinearity,
    #[serde(default = "zero_law")]
    pub eta: PowerLaw,
    pub delta: PowerLaw,
    pub rho: PowerLaw,
    pub sweep: Sweep,
    /// Evaluation points; five points on `|x| = inradius/2` when absent.
    #[serde(default)]
    pub probes: Option<Vec<Point>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

fn zero_law() -> PowerLaw {
    PowerLaw::constant(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub eps_start: f64,
    pub eps_end: f64,
    pub points_per_decade: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub newton: f64,
    pub max_iter: usize,
    pub armijo: bool,
    /// Tolerance of the invariant checks run by `verify`.
    pub quadrature_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Tolerances {
            newton: n.tol,
            max_iter: n.max_iter,
            armijo: n.armijo,
            quadrature_check: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::config(json_field(&e), e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn family(&self) -> EpsFamily {
        EpsFamily::new(self.delta, self.rho, self.eta)
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tolerances.newton,
            max_iter: self.tolerances.max_iter,
            armijo: self.tolerances.armijo,
        }
    }

    /// Checks every field that does not require building surfaces. `min_order`
    /// is [`MIN_RUN_ORDER`] for sweeps.
    pub fn validate(&self, min_order: usize) -> Result<()> {
        if self.quad_order < min_order {
            return Err(Error::config(
                "quad_order",
                format!("must be at least {min_order}, got {}", self.quad_order),
            ));
        }
        let s = &self.sweep;
        if !(s.eps_start > s.eps_end && s.eps_end > 0.0 && s.eps_start.is_finite()) {
            return Err(Error::config(
                "sweep",
                format!("need eps_start > eps_end > 0, got {} and {}", s.eps_start, s.eps_end),
            ));
        }
        if !(s.points_per_decade > 0.0 && s.points_per_decade.is_finite()) {
            return Err(Error::config("sweep.points_per_decade", "must be positive"));
        }
        self.g_o.validate("g_o")?;
        self.g_i.validate("g_i")?;
        self.nonlinearity.validate()?;
        self.family().validate()?;
        let t = &self.tolerances;
        if !(t.newton > 0.0) || !(t.quadrature_check > 0.0) || t.max_iter == 0 {
            return Err(Error::config("tolerances", "newton, quadrature_check and max_iter must be positive"));
        }
        if let Some(p) = &self.probes {
            if p.is_empty() || p.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::config("probes", "need at least one finite point"));
            }
        }
        if self.outputs.formats.is_empty() {
            return Err(Error::config("outputs.formats", "select csv, json or both"));
        }
        Ok(())
    }

    /// Builds both surfaces and samples the data at `order`.
    pub fn problem(&self, order: usize) -> Result<Problem> {
        let outer = build_surface(&self.outer, order).map_err(|e| Error::config("outer", e.to_string()))?;
        let inner = build_surface(&self.inner, order).map_err(|e| Error::config("inner", e.to_string()))?;
        let g_o = self.g_o.sample(&outer);
        let g_i = self.g_i.sample(&inner);
        Problem::new(ProblemData {
            outer,
            inner,
            g_o,
            g_i,
            nonlinearity: self.nonlinearity,
            family: self.family(),
        })
    }
}

fn json_field(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ANNULUS: &str = r#"
outer = { kind = "unit-sphere" }
inner = { kind = "unit-sphere" }
quad_order = 16
g_o = 1.0
g_i = 1.0
nonlinearity = { form = "linear" }
delta = { coefficient = 1.0, exponent = -1.0 }
rho = { coefficient = 1.0, exponent = 2.0 }

[sweep]
eps_start = 0.1
eps_end = 0.0125
points_per_decade = 4
"#;

    #[test]
    fn parses_toml_and_json_alike() {
        let a = RunConfig::parse(ANNULUS).unwrap();
        a.validate(MIN_RUN_ORDER).unwrap();
        assert_eq!(a.inner, SurfaceSpec::UnitSphere);
        assert_eq!(a.eta, PowerLaw::constant(0.0));
        assert_eq!(a.outputs.formats, vec![Format::Csv, Format::Json]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(RunConfig::parse(&json).unwrap(), a);
    }

    #[test]
    fn star_and_expansion_data() {
        let text = ANNULUS
            .replace(r#"inner = { kind = "unit-sphere" }"#, r#"inner = { kind = "star-shaped", harmonics = [[2, 0, 0.1]] }"#)
            .replace("g_o = 1.0", "g_o = { constant = 1.0, harmonics = [[1, 0, 0.2]] }")
            .replace(r#"{ form = "linear" }"#, r#"{ form = "power-perturbation", m = 3 }"#);
        let c = RunConfig::parse(&text).unwrap();
        c.validate(MIN_RUN_ORDER).unwrap();
        assert_eq!(c.inner, SurfaceSpec::star(1.0, &[(2, 0, 0.1)]));
        assert_eq!(c.nonlinearity, Nonlinearity::PowerPerturbation { m: 3 });
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::ConfigInvalid { field, .. } => field,
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        let c = RunConfig::parse(&ANNULUS.replace("exponent = -1.0", "exponent = -1.5")).unwrap();
        let e = c.validate(MIN_RUN_ORDER).unwrap_err();
        assert!(e.to_string().contains("d₀ ≡ lim ε δ(ε)"));
        assert_eq!(field_of(e), "delta.exponent");
        let c = RunConfig::parse(&ANNULUS.replace("exponent = 2.0", "exponent = 2.5")).unwrap();
        assert!(c.validate(MIN_RUN_ORDER).unwrap_err().to_string().contains("ε^{n-1}/ρ(ε)"));
        let c = RunConfig::parse(&ANNULUS.replace("quad_order = 16", "quad_order = 6")).unwrap();
        assert_eq!(field_of(c.validate(MIN_RUN_ORDER).unwrap_err()), "quad_order");
        let c = RunConfig::parse(&ANNULUS.replace("eps_end = 0.0125", "eps_end = 0.2")).unwrap();
        assert_eq!(field_of(c.validate(MIN_RUN_ORDER).unwrap_err()), "sweep");
        assert!(RunConfig::parse(&ANNULUS.replace("unit-sphere\" }\nquad", "blob\" }\nquad")).is_err());
        assert!(RunConfig::parse("{ \"outer\": 3 }").is_err());
    }

    #[test]
    fn bad_surface_is_a_config_error() {
        let text = ANNULUS.replace(
            r#"inner = { kind = "unit-sphere" }"#,
            r#"inner = { kind = "star-shaped", radius = 0.1, harmonics = [[2, 0, 1.0]] }"#,
        );
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(field_of(c.problem(8).unwrap_err()), "inner");
    }
}
