//! Experiment configuration files.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA: &str = "vortexlab/1";

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Sphere,
    Torus { tau: [f64; 2] },
    DiskDouble,
}

impl SurfaceSpec {
    pub fn genus(&self) -> usize {
        match self {
            SurfaceSpec::Torus { .. } => 1,
            _ => 0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SurfaceSpec::Sphere => "sphere".into(),
            SurfaceSpec::Torus { tau } => format!("torus(tau={}+{}i)", tau[0], tau[1]),
            SurfaceSpec::DiskDouble => "disk-double".into(),
        }
    }

    pub fn tau(&self) -> Option<Complex64> {
        match self {
            SurfaceSpec::Torus { tau } => Some(Complex64::new(tau[0], tau[1])),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    #[default]
    Rk4,
    Midpoint,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub scheme: SchemeName,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Simulate,
    Kimura,
    Geodesic,
    GreenCheck,
    SchottkyCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Kimura => "kimura",
            ExperimentKind::Geodesic => "geodesic",
            ExperimentKind::GreenCheck => "green-check",
            ExperimentKind::SchottkyCheck => "schottky-check",
        }
    }
}

/// Kind-specific parameters; each experiment reads the fields it needs.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Option<ExperimentKind>,
    /// Pair separations, decreasing.
    pub epsilons: Option<Vec<f64>>,
    /// Pair center or geodesic start `(x, y)` in chart 0.
    pub center: Option<[f64; 2]>,
    /// Direction angle in radians.
    pub direction: Option<f64>,
    pub gamma: Option<f64>,
    /// Metric length of the compared stretch of a pair path.
    pub window: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub surface: SurfaceSpec,
    /// `(x, y, Gamma)` in chart 0.
    #[serde(default)]
    pub vortices: Vec<[f64; 3]>,
    /// Omitted circulation vectors default to zeros of length genus.
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    pub integrator: Option<IntegratorSpec>,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn a(&self) -> Vec<f64> {
        self.a.clone().unwrap_or_else(|| vec![0.0; self.surface.genus()])
    }

    pub fn b(&self) -> Vec<f64> {
        self.b.clone().unwrap_or_else(|| vec![0.0; self.surface.genus()])
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema != SCHEMA {
            return bad(format!("schema must be \"{SCHEMA}\", found \"{}\"", self.schema));
        }
        if let SurfaceSpec::Torus { tau } = self.surface {
            if !(tau[1] > 0.0) || !tau.iter().all(|v| v.is_finite()) {
                return bad(format!("torus modulus needs a positive imaginary part, found {tau:?}"));
            }
        }
        let g = self.surface.genus();
        for (name, v) in [("a", &self.a), ("b", &self.b)] {
            let Some(v) = v else { continue };
            if v.len() != g {
                return bad(format!(
                    "circulation vector {name} has length {} but the {} has genus {g}",
                    v.len(),
                    self.surface.label()
                ));
            }
        }
        if self
            .vortices
            .iter()
            .flatten()
            .chain(self.a.iter().flatten())
            .chain(self.b.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return bad("vortex data and circulations must be finite".into());
        }
        if let Some(it) = &self.integrator {
            if !(it.dt > 0.0) || !(it.t_end >= 0.0) || it.stride == 0 {
                return bad("integrator needs dt > 0, t_end >= 0 and stride >= 1".into());
            }
        }
        Ok(())
    }

    /// The declared kind must agree with the subcommand when present.
    pub fn check_kind(&self, kind: &ExperimentKind) -> Result<(), CliError> {
        match &self.experiment.kind {
            Some(k) if k != kind => Err(CliError::Config(format!(
                "config declares a {} experiment but {} was requested",
                k.name(),
                kind.name()
            ))),
            _ => Ok(()),
        }
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.experiment.tolerances.get(name).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sphere_config() {
        let cfg = ExperimentConfig::parse(r#"{"schema": "vortexlab/1", "surface": {"kind": "sphere"}}"#).unwrap();
        assert_eq!(cfg.surface.genus(), 0);
        assert!(cfg.vortices.is_empty());
    }

    #[test]
    fn schema_and_genus_are_enforced() {
        let wrong = r#"{"schema": "other", "surface": {"kind": "sphere"}}"#;
        assert!(matches!(ExperimentConfig::parse(wrong), Err(CliError::Config(_))));
        let short = r#"{"schema": "vortexlab/1", "surface": {"kind": "torus", "tau": [0, 1]}, "a": [0.1, 0.2]}"#;
        let err = ExperimentConfig::parse(short).unwrap_err().to_string();
        assert!(err.contains("genus"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let typo = r#"{"schema": "vortexlab/1", "surface": {"kind": "sphere"}, "vortexes": []}"#;
        assert!(ExperimentConfig::parse(typo).is_err());
    }
}
