//! Gate templates instantiated at a given (α, κT), and single gate runs
//! with their phase and fidelity analysis.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::metrics::extract_relative_phase;
use crate::catcode::CatBasis;
use crate::error::{Error, Result};
use crate::fockspace::{SpaceConfig, StateVector, C64};
use crate::gates::{
    dfs_block, expected_holonomy, make_collision_path, make_loop_path, outward_center, run_gate, BasisTag,
    CollisionGateSpec, GateOutcome, GateRunConfig, GateSpec, ParameterPath, Profile,
};
use crate::liouvillian::{symmetric_roots, DensityOperator, Integrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Loop,
    Collision,
}

impl GateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GateKind::Loop => "loop",
            GateKind::Collision => "collision",
        }
    }
}

/// A gate family parametrized by the initial radius α and duration κT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateTemplate {
    pub kind: GateKind,
    pub d: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Loop: enclosed area, radius `√(A/π)`.
    #[serde(default = "default_area")]
    pub area: f64,
    /// Loop: index of the moving root.
    #[serde(default = "default_target")]
    pub target: usize,
    #[serde(default = "default_true")]
    pub clockwise: bool,
    /// Collision: rotation angle.
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub alpha_min: f64,
    #[serde(default)]
    pub gamma: (f64, f64),
    #[serde(default)]
    pub profile: Profile,
}

fn default_kappa() -> f64 {
    1.0
}
fn default_area() -> f64 {
    PI / 4.0
}
fn default_target() -> usize {
    1
}
fn default_true() -> bool {
    true
}

impl GateTemplate {
    pub fn loop_gate(d: usize, area: f64) -> Self {
        Self {
            kind: GateKind::Loop,
            d,
            kappa: 1.0,
            area,
            target: 1,
            clockwise: true,
            phi: 0.0,
            alpha_min: 0.0,
            gamma: (0.0, 0.0),
            profile: Profile::Linear,
        }
    }

    pub fn collision(d: usize, phi: f64) -> Self {
        Self {
            kind: GateKind::Collision,
            phi,
            area: 0.0,
            ..Self::loop_gate(d, 0.0)
        }
    }

    pub fn radius(&self) -> f64 {
        (self.area.abs() / PI).sqrt()
    }

    /// Builds the path, the ideal holonomy and the input state.
    pub fn prepare(&self, alpha: f64, kappa_t: f64, space: Option<SpaceConfig>, tail_tol: f64) -> Result<PreparedGate> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("d must be positive".into()));
        }
        if !(alpha > 0.0) || !(kappa_t > 0.0) || !(self.kappa > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "need α > 0, κT > 0 and κ > 0 (got {alpha}, {kappa_t}, {})",
                self.kappa
            )));
        }
        let total_t = kappa_t / self.kappa;
        let (path, gate) = match self.kind {
            GateKind::Loop => {
                if self.d < 2 {
                    return Err(Error::InvalidSpec("a loop gate needs d ≥ 2".into()));
                }
                let base = symmetric_roots(self.d, C64::from(alpha));
                let r = self.radius();
                let center = outward_center(*base.get(self.target).ok_or_else(|| {
                    Error::InvalidSpec(format!("target root {} out of range", self.target))
                })?, r);
                let (path, spec) = make_loop_path(self.target, center, r, total_t, &base, self.clockwise)?;
                (path, GateSpec::Loop(spec))
            }
            GateKind::Collision => {
                let spec = CollisionGateSpec {
                    phi: self.phi,
                    gamma: self.gamma,
                    alpha_min: self.alpha_min,
                    profile: self.profile,
                };
                let path = make_collision_path(&spec, C64::from(alpha), self.d, total_t)?;
                (path, GateSpec::Collision(spec))
            }
        };
        let space = match space {
            Some(s) => s,
            None => SpaceConfig::sufficient(path.max_abs_root(256), tail_tol)?,
        };
        let initial = CatBasis::from_roots(&path.start_roots(), &space)?;
        // loop gates start in the even cat so that the moving coherent
        // component interferes with a partner; collisions start in the
        // uniform cat superposition
        let input_cat = match self.kind {
            GateKind::Loop => DVector::from_fn(self.d, |i, _| C64::from(if i == 0 { 1.0 } else { 0.0 })),
            GateKind::Collision => DVector::from_element(self.d, C64::from(1.0 / (self.d as f64).sqrt())),
        };
        let amps = initial.matrix() * &input_cat;
        let rho0 = DensityOperator::pure(&StateVector::normalized(amps)?);
        let (phase_tag, pair) = match &gate {
            GateSpec::Loop(l) => (BasisTag::Coherent, (l.target_root, if l.target_root == 0 { 1 } else { 0 })),
            GateSpec::Collision(_) => (BasisTag::Cat, (1.min(self.d - 1), 0)),
        };
        let ideal = expected_holonomy(&gate, self.d);
        let expected_phase = {
            let m = &ideal.matrix;
            let (i, j) = pair;
            (m[(i, i)] * m[(j, j)].conj()).arg()
        };
        let target_cat = ideal.to_basis(BasisTag::Cat).matrix * &input_cat;
        Ok(PreparedGate {
            template: self.clone(),
            alpha,
            kappa_t,
            path,
            gate,
            space,
            rho0,
            input_cat,
            target_cat,
            phase_tag,
            pair,
            expected_phase,
        })
    }
}

/// A fully specified gate run.
#[derive(Debug, Clone)]
pub struct PreparedGate {
    pub template: GateTemplate,
    pub alpha: f64,
    pub kappa_t: f64,
    pub path: ParameterPath,
    pub gate: GateSpec,
    pub space: SpaceConfig,
    pub rho0: DensityOperator,
    /// Input state in cat-basis coordinates.
    pub input_cat: DVector<C64>,
    /// Ideal output in cat-basis coordinates.
    pub target_cat: DVector<C64>,
    pub phase_tag: BasisTag,
    pub pair: (usize, usize),
    pub expected_phase: f64,
}

/// Integrator choice shared by runs, sweeps and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    #[serde(default = "default_method")]
    pub method: Integrator,
    #[serde(default)]
    pub steps: Option<usize>,
    /// Step size of the exponential integrators (units of 1/κ).
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_method() -> Integrator {
    Integrator::Rk4
}
fn default_step() -> f64 {
    0.2
}
fn default_samples() -> usize {
    1
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            method: default_method(),
            steps: None,
            step: default_step(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GateReport {
    pub outcome: GateOutcome,
    /// Relative phase of the analysed pair, or the coherence error.
    pub phase: std::result::Result<f64, String>,
    pub expected_phase: f64,
    /// `⟨ψ_target|M|ψ_target⟩`
    pub fidelity: f64,
    pub n_trunc: usize,
    pub steps: usize,
    pub wall_time: f64,
}

impl GateReport {
    pub fn phase_error(&self) -> Option<f64> {
        self.phase
            .as_ref()
            .ok()
            .map(|p| super::metrics::wrap_phase(p - self.expected_phase).abs())
    }
}

impl PreparedGate {
    pub fn run_config(&self, settings: &IntegrationSettings) -> GateRunConfig {
        let mut cfg = GateRunConfig::new(self.template.kappa, self.space);
        cfg.integrator = settings.method;
        cfg.steps = settings.steps;
        cfg.exp_step = settings.step;
        cfg.samples = settings.samples;
        cfg
    }

    pub fn run(&self, settings: &IntegrationSettings) -> Result<GateReport> {
        self.run_with(&self.run_config(settings))
    }

    pub fn run_with(&self, cfg: &GateRunConfig) -> Result<GateReport> {
        let start = Instant::now();
        let outcome = run_gate(&self.path, &self.rho0, cfg)?;
        let wall_time = start.elapsed().as_secs_f64();
        let reference = dfs_block(self.rho0.matrix(), &outcome.initial_basis, self.phase_tag);
        let block = outcome.block_in(self.phase_tag);
        let phase = extract_relative_phase(&block, &reference, self.pair).map_err(|e| e.to_string());
        let fidelity = outcome.fidelity(&self.target_cat);
        Ok(GateReport {
            n_trunc: self.space.n_trunc,
            steps: outcome.trajectory.schedule.steps,
            outcome,
            phase,
            expected_phase: self.expected_phase,
            fidelity,
            wall_time,
        })
    }

    /// Same run in a larger truncation.
    pub fn with_space(&self, space: SpaceConfig) -> Result<PreparedGate> {
        self.template.prepare(self.alpha, self.kappa_t, Some(space), space.tail_tol)
    }

    /// DFS block of the input in the analysis basis.
    pub fn input_block(&self) -> Result<DMatrix<C64>> {
        let initial = CatBasis::from_roots(&self.path.start_roots(), &self.space)?;
        Ok(dfs_block(self.rho0.matrix(), &initial, self.phase_tag))
    }
}
