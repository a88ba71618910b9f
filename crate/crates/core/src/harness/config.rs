//! TOML run configuration (schema version 1) and run summaries.
//!
//! ```toml
//! version = 1
//!
//! [gate]
//! kind = "loop"        # or "collision"
//! area = 0.785398      # loop: enclosed area A, phase 2A
//! phi = 1.570796       # collision: rotation angle
//! target = 1           # loop: moving root
//! clockwise = true
//! alpha_min = 0.0      # collision: closest approach
//! gamma = [0.0, 0.0]   # collision: center of mass (d = 2 only)
//! profile = "linear"   # or "smoothstep"
//!
//! [path]
//! T = 200.0            # κT
//!
//! [space]
//! n_trunc = 30         # optional; chosen from the path otherwise
//! tail_tol = 1e-8
//!
//! [jump]
//! kappa = 1.0
//! d = 2
//! alpha = 2.0
//!
//! [integrator]
//! method = "rk4"       # "magnus4", "midpoint"
//! step = 0.2           # exponential integrators, units of 1/κ
//! samples = 200        # stored trajectory points
//!
//! [sweep]              # only read by `sweep`
//! alphas = [2.0, 2.5, 3.0, 3.5]
//! kappa_T = [50.0, 100.0, 200.0, 400.0]
//! shape = "cross"
//! compute_gap = false
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::fmt_num;
use super::runner::{GateKind, GateTemplate, IntegrationSettings};
use super::sweep::{GridShape, SweepSpec};
use crate::error::{Error, Result};
use crate::fockspace::SpaceConfig;
use crate::gates::Profile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub kind: GateKind,
    #[serde(default)]
    pub area: Option<f64>,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub target: Option<usize>,
    #[serde(default)]
    pub clockwise: Option<bool>,
    #[serde(default)]
    pub alpha_min: Option<f64>,
    #[serde(default)]
    pub gamma: Option<(f64, f64)>,
    #[serde(default)]
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    #[serde(default)]
    pub n_trunc: Option<usize>,
    #[serde(default)]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSection {
    #[serde(default = "one")]
    pub kappa: f64,
    pub d: usize,
    pub alpha: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    #[serde(rename = "kappa_T")]
    pub kappa_ts: Vec<f64>,
    #[serde(default)]
    pub shape: GridShape,
    #[serde(default)]
    pub compute_gap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub gate: GateSection,
    pub path: PathSection,
    #[serde(default)]
    pub space: SpaceSection,
    pub jump: JumpSection,
    #[serde(default)]
    pub integrator: IntegrationSettings,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        if cfg.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "{origin}: unsupported config version {} (expected {SCHEMA_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn template(&self) -> GateTemplate {
        let g = &self.gate;
        let base = match g.kind {
            GateKind::Loop => GateTemplate::loop_gate(self.jump.d, g.area.unwrap_or(std::f64::consts::PI / 4.0)),
            GateKind::Collision => GateTemplate::collision(self.jump.d, g.phi.unwrap_or(0.0)),
        };
        GateTemplate {
            kappa: self.jump.kappa,
            target: g.target.unwrap_or(base.target),
            clockwise: g.clockwise.unwrap_or(base.clockwise),
            alpha_min: g.alpha_min.unwrap_or(0.0),
            gamma: g.gamma.unwrap_or((0.0, 0.0)),
            profile: g.profile.unwrap_or_default(),
            ..base
        }
    }

    pub fn tail_tol(&self) -> f64 {
        self.space.tail_tol.unwrap_or(SpaceConfig::DEFAULT_TAIL_TOL)
    }

    /// Fixed truncation, if any; `override_n` wins over the file.
    pub fn space(&self, override_n: Option<usize>) -> Result<Option<SpaceConfig>> {
        override_n
            .or(self.space.n_trunc)
            .map(|n| SpaceConfig::new(n, self.tail_tol()))
            .transpose()
    }

    pub fn sweep_spec(&self, override_n: Option<usize>) -> Result<SweepSpec> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
        Ok(SweepSpec {
            template: self.template(),
            alphas: s.alphas.clone(),
            kappa_ts: s.kappa_ts.clone(),
            shape: s.shape,
            settings: self.integrator.clone(),
            n_trunc: override_n.or(self.space.n_trunc),
            tail_tol: self.tail_tol(),
            compute_gap: s.compute_gap,
        })
    }
}

/// Flat key/value summary written next to every run, in TOML.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        let text = if v.is_finite() { fmt_num(v) } else if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
        self.entries.push((key.into(), text));
        self
    }

    pub fn int(&mut self, key: &str, v: usize) -> &mut Self {
        self.entries.push((key.into(), v.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, v: &str) -> &mut Self {
        self.entries.push((key.into(), toml::Value::String(v.into()).to_string()));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.entries.push((key.into(), v.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!("version = {SCHEMA_VERSION}\n");
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOP: &str = r#"
version = 1
[gate]
kind = "loop"
area = 0.785398163397
[path]
T = 200.0
[jump]
d = 2
alpha = 2.0
"#;

    #[test]
    fn parses_minimal_loop() {
        let cfg = RunConfig::parse(LOOP, "inline").unwrap();
        let t = cfg.template();
        assert_eq!(t.kind, GateKind::Loop);
        assert!((t.radius() - 0.5).abs() < 1e-6);
        assert_eq!(cfg.integrator, IntegrationSettings::default());
        assert!(cfg.space(None).unwrap().is_none());
        assert_eq!(cfg.space(Some(40)).unwrap().unwrap().n_trunc, 40);
    }

    #[test]
    fn unknown_field_is_reported_with_location() {
        let bad = LOOP.replace("alpha = 2.0", "alpha = 2.0\nalhpa = 3");
        let err = RunConfig::parse(&bad, "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("cfg.toml"), "{err}");
        assert!(err.contains("alhpa"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        let bad = LOOP.replace("version = 1", "version = 7");
        assert!(matches!(RunConfig::parse(&bad, "x"), Err(Error::Config(_))));
    }

    #[test]
    fn summary_is_valid_toml() {
        let mut s = Summary::new();
        s.num("epsilon", 1.25e-3).int("n_trunc", 30).text("method", "rk4").flag("ok", true).num("gap", f64::NAN);
        let v: toml::Value = toml::from_str(&s.render()).unwrap();
        assert_eq!(v["n_trunc"].as_integer(), Some(30));
        assert!((v["epsilon"].as_float().unwrap() - 1.25e-3).abs() < 1e-15);
        assert!(v["gap"].as_float().unwrap().is_nan());
    }
}
