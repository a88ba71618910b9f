//! Loop and collision gates: path generators, ideal holonomies, simulated
//! gate runs and the projector-product (Zeno) model.

mod path;
mod zeno;

pub use path::{Curve, ParameterPath, Profile, Segment};
pub use zeno::{zeno_gate_error, zeno_identity_residual, zeno_product};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::catcode::{fourier_matrix, CatBasis};
use crate::error::{Error, Result};
use crate::fockspace::{SpaceConfig, C64, ZERO};
use crate::harness::metrics::impurity;
use crate::liouvillian::{evolve, propagate_operator, DensityOperator, Integrator, RootTrajectory, Schedule, Trajectory};

/// Hard minimum distance between a looping root and every other root.
pub const SEPARATION_HARD: f64 = 4.0;
/// Below this distance a warning is logged.
pub const SEPARATION_ADVISORY: f64 = 6.0;
/// Leakage out of the DFS treated as a failed gate.
pub const MAX_LEAKAGE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    /// `|μ_α⟩`
    Cat,
    /// `(1/√d) Σ_μ e^{i2πμν/d}|μ_α⟩ ≈ |αe_ν⟩`
    Coherent,
}

/// d×d matrix acting on the DFS, with the basis it is written in.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyMatrix {
    pub matrix: DMatrix<C64>,
    pub basis: BasisTag,
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

impl HolonomyMatrix {
    pub fn new(matrix: DMatrix<C64>, basis: BasisTag) -> Self {
        Self { matrix, basis }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Conjugation by the discrete Fourier matrix.
    pub fn to_basis(&self, tag: BasisTag) -> HolonomyMatrix {
        if tag == self.basis {
            return self.clone();
        }
        let w = fourier_matrix(self.dim());
        let matrix = match tag {
            BasisTag::Coherent => w.adjoint() * &self.matrix * &w,
            BasisTag::Cat => &w * &self.matrix * w.adjoint(),
        };
        HolonomyMatrix { matrix, basis: tag }
    }

    pub fn unitarity_residual(&self) -> f64 {
        let d = self.dim();
        spectral_norm(&(self.matrix.adjoint() * &self.matrix - DMatrix::identity(d, d)))
    }

    /// `min_θ ‖U − e^{iθ}V‖₂` with θ = arg Tr(V†U), both in the basis of `self`.
    pub fn distance_up_to_phase(&self, other: &HolonomyMatrix) -> f64 {
        let v = other.to_basis(self.basis).matrix;
        let overlap = (v.adjoint() * &self.matrix).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
        spectral_norm(&(&self.matrix - v * phase))
    }

    /// `|Tr(V†U)|/d`
    pub fn trace_fidelity(&self, other: &HolonomyMatrix) -> f64 {
        let v = other.to_basis(self.basis).matrix;
        (v.adjoint() * &self.matrix).trace().norm() / self.dim() as f64
    }
}

fn diag_phases(phases: &[f64], basis: BasisTag) -> HolonomyMatrix {
    let diag = DVector::from_iterator(phases.len(), phases.iter().map(|&p| C64::from_polar(1.0, p)));
    HolonomyMatrix::new(DMatrix::from_diagonal(&diag), basis)
}

/// One root carried once around a circle while the others hold.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopGateSpec {
    pub target_root: usize,
    pub center: C64,
    pub radius: f64,
    pub clockwise: bool,
    /// `½∮(P dX − X dP)` of the stored curve; positive when clockwise.
    pub enclosed_area: f64,
}

impl LoopGateSpec {
    /// `θ = 2A`
    pub fn theta(&self) -> f64 {
        2.0 * self.enclosed_area
    }
}

/// Shrink, re-expand at a new phase, rotate back.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CollisionGateSpec {
    pub phi: f64,
    /// Center of mass of a displaced two-root collision; zero for the
    /// symmetric gate.
    #[serde(default)]
    pub gamma: (f64, f64),
    #[serde(default)]
    pub alpha_min: f64,
    #[serde(default)]
    pub profile: Profile,
}

impl CollisionGateSpec {
    pub fn symmetric(phi: f64) -> Self {
        Self {
            phi,
            gamma: (0.0, 0.0),
            alpha_min: 0.0,
            profile: Profile::Linear,
        }
    }

    pub fn gamma(&self) -> C64 {
        C64::new(self.gamma.0, self.gamma.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Loop(LoopGateSpec),
    Collision(CollisionGateSpec),
}

fn check_separation(distance: f64) -> Result<()> {
    if distance < SEPARATION_HARD - 1e-9 {
        return Err(Error::SeparationViolation {
            distance,
            threshold: SEPARATION_HARD,
        });
    }
    if distance < SEPARATION_ADVISORY {
        log::warn!("root separation {distance:.3} below the advisory threshold {SEPARATION_ADVISORY}");
    }
    Ok(())
}

/// Center of a loop of radius `r` that starts at `root` and lies radially
/// outside it.
pub fn outward_center(root: C64, radius: f64) -> C64 {
    if root.norm() == 0.0 {
        return root + C64::from(radius);
    }
    root + root / root.norm() * radius
}

/// Root `nu` of `base` traverses the circle through its position around
/// `center` once at constant angular speed; the other roots hold.
pub fn make_loop_path(
    nu: usize,
    center: C64,
    radius: f64,
    total_t: f64,
    base: &[C64],
    clockwise: bool,
) -> Result<(ParameterPath, LoopGateSpec)> {
    let d = base.len();
    if nu >= d {
        return Err(Error::InvalidSpec(format!("target root {nu} out of range for d = {d}")));
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidSpec(format!("radius must be nonnegative, got {radius}")));
    }
    let start = base[nu];
    if ((start - center).norm() - radius).abs() > 1e-9 * radius.max(1.0) {
        return Err(Error::InvalidSpec(format!(
            "root {nu} at {start} is not on the circle of radius {radius} around {center}"
        )));
    }
    for (k, other) in base.iter().enumerate() {
        if k != nu {
            check_separation(((center - other).norm() - radius).abs())?;
        }
    }
    let angle = if clockwise { -2.0 * PI } else { 2.0 * PI };
    let curves = base
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            if k == nu {
                Curve::Arc { center, from: z, angle }
            } else {
                Curve::Hold(z)
            }
        })
        .collect();
    let path = ParameterPath::new(
        d,
        vec![Segment {
            fraction: 1.0,
            profile: Profile::Linear,
            curves,
        }],
        total_t,
    )?;
    let enclosed_area = path.clockwise_area(nu);
    let expected = if clockwise { 1.0 } else { -1.0 } * PI * radius * radius;
    debug_assert!((enclosed_area - expected).abs() < 1e-8 * expected.abs().max(1.0));
    Ok((
        path,
        LoopGateSpec {
            target_root: nu,
            center,
            radius,
            clockwise,
            enclosed_area,
        },
    ))
}

/// Three equal stages per root `ν` (phase `θ_ν = arg α₀ + 2πν/d`):
/// radial ramp `|α₀| → α_min`, ramp back out along `θ_ν + φ`, and rotation
/// `θ_ν + φ → θ_ν`. With `α_min > 0` the second stage also turns the
/// phase, since the shrunken roots cannot jump.
pub fn make_collision_path(spec: &CollisionGateSpec, alpha0: C64, d: usize, total_t: f64) -> Result<ParameterPath> {
    let gamma = spec.gamma();
    if gamma != ZERO && d > 2 {
        return Err(Error::InvalidSpec("displaced collisions are defined for d = 2 only".into()));
    }
    let r = alpha0.norm();
    if !(spec.alpha_min >= 0.0) || spec.alpha_min >= r {
        return Err(Error::InvalidSpec(format!(
            "alpha_min = {} must lie in [0, |α₀| = {r})",
            spec.alpha_min
        )));
    }
    let theta = |nu: usize| alpha0.arg() + 2.0 * PI * nu as f64 / d as f64;
    let stage = |f: &dyn Fn(usize) -> Curve| Segment {
        fraction: 1.0 / 3.0,
        profile: spec.profile,
        curves: (0..d).map(f).collect(),
    };
    let shrink = stage(&|nu| Curve::RadialRamp {
        origin: gamma,
        r_from: r,
        r_to: spec.alpha_min,
        phase_from: theta(nu),
        phase_to: theta(nu),
    });
    let expand = stage(&|nu| Curve::RadialRamp {
        origin: gamma,
        r_from: spec.alpha_min,
        r_to: r,
        phase_from: if spec.alpha_min > 0.0 { theta(nu) } else { theta(nu) + spec.phi },
        phase_to: theta(nu) + spec.phi,
    });
    let rotate = stage(&|nu| Curve::PhaseRotation {
        origin: gamma,
        radius: r,
        phase_from: theta(nu) + spec.phi,
        phase_to: theta(nu),
    });
    ParameterPath::new(d, vec![shrink, expand, rotate], total_t)
}

/// Loop: `e^{iθ}` on the target coherent state (coherent basis).
/// Collision: `diag(e^{−iφμ})` (cat basis).
pub fn expected_holonomy(gate: &GateSpec, d: usize) -> HolonomyMatrix {
    match gate {
        GateSpec::Loop(l) => {
            let phases: Vec<f64> = (0..d).map(|nu| if nu == l.target_root { l.theta() } else { 0.0 }).collect();
            diag_phases(&phases, BasisTag::Coherent)
        }
        GateSpec::Collision(c) => {
            let phases: Vec<f64> = (0..d).map(|mu| -c.phi * mu as f64).collect();
            diag_phases(&phases, BasisTag::Cat)
        }
    }
}

/// Integration settings for a gate run.
#[derive(Debug, Clone)]
pub struct GateRunConfig {
    pub kappa: f64,
    pub space: SpaceConfig,
    pub integrator: Integrator,
    /// Fixed step count; `None` chooses one from the path.
    pub steps: Option<usize>,
    /// Step size of the exponential integrators, in units of 1/κ, when
    /// `steps` is `None`.
    pub exp_step: f64,
    pub samples: usize,
    /// Also reconstruct the full DFS map (d extra propagations).
    pub tomography: bool,
}

impl GateRunConfig {
    pub fn new(kappa: f64, space: SpaceConfig) -> Self {
        Self {
            kappa,
            space,
            integrator: Integrator::Rk4,
            steps: None,
            exp_step: 0.2,
            samples: 1,
            tomography: false,
        }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn schedule(&self, path: &dyn RootTrajectory) -> Schedule {
        let base = match (self.steps, self.integrator) {
            (Some(n), method) => Schedule::with_method(method, n),
            (None, Integrator::Rk4) => Schedule::auto_rk4(path, self.kappa, &self.space),
            (None, method) => Schedule::by_step(method, path, self.exp_step / self.kappa),
        };
        base.with_samples(self.samples)
    }
}

#[derive(Debug, Clone)]
pub struct GateOutcome {
    pub trajectory: Trajectory,
    pub initial_basis: CatBasis,
    pub final_basis: CatBasis,
    /// `M_{μμ′} = ⟨μ_α|ρ(T)|μ′_α⟩` in the final cat basis.
    pub block: DMatrix<C64>,
    pub impurity: f64,
    /// `1 − Tr[P ρ P]`
    pub leakage: f64,
    pub holonomy: Option<HolonomyMatrix>,
}

/// `B†ρB` with the basis columns of `basis`, optionally Fourier-rotated.
pub fn dfs_block(rho: &DMatrix<C64>, basis: &CatBasis, tag: BasisTag) -> DMatrix<C64> {
    let mut b = basis.matrix();
    if tag == BasisTag::Coherent {
        b = b * fourier_matrix(basis.d);
    }
    b.adjoint() * rho * b
}

impl GateOutcome {
    pub fn final_state(&self) -> &DensityOperator {
        self.trajectory.final_state()
    }

    pub fn block_in(&self, tag: BasisTag) -> DMatrix<C64> {
        match tag {
            BasisTag::Cat => self.block.clone(),
            BasisTag::Coherent => {
                let w = fourier_matrix(self.final_basis.d);
                w.adjoint() * &self.block * w
            }
        }
    }

    /// `⟨ψ|M|ψ⟩` for a target written in cat-basis coordinates.
    pub fn fidelity(&self, target_cat: &DVector<C64>) -> f64 {
        target_cat.dotc(&(&self.block * target_cat)).re
    }
}

/// Evolves `rho0` along `path` and analyses the final state against the
/// steady basis of the final root configuration.
pub fn run_gate(path: &ParameterPath, rho0: &DensityOperator, cfg: &GateRunConfig) -> Result<GateOutcome> {
    let initial_basis = CatBasis::from_roots(&path.start_roots(), &cfg.space)?;
    let final_basis = CatBasis::from_roots(&path.end_roots(), &cfg.space)?;
    let start_block = dfs_block(rho0.matrix(), &initial_basis, BasisTag::Cat);
    let start_leak = 1.0 - start_block.trace().re;
    if start_leak > 1e-6 {
        return Err(Error::InvalidState(format!(
            "initial state leaks {start_leak:.3e} out of the steady space"
        )));
    }
    let schedule = cfg.schedule(path);
    let trajectory = evolve(rho0, cfg.kappa, path, &schedule, &cfg.space)?;
    let rho = trajectory.final_state();
    let block = dfs_block(rho.matrix(), &final_basis, BasisTag::Cat);
    let leakage = 1.0 - block.trace().re;
    if leakage > MAX_LEAKAGE {
        return Err(Error::LeakageExcess(leakage));
    }
    let holonomy = if cfg.tomography {
        Some(tomography_with(path, cfg, &schedule, &initial_basis, &final_basis)?)
    } else {
        None
    };
    Ok(GateOutcome {
        impurity: impurity(rho),
        trajectory,
        initial_basis,
        final_basis,
        block,
        leakage,
        holonomy,
    })
}

/// Reconstructs the DFS map `U` (cat basis) from the propagated operators
/// `|μ⟩⟨0|`: the block of the image of `|0⟩⟨0|` gives `u₀` up to a phase,
/// then `u_μ = B⁽μ⁾u₀/|u₀|²`.
pub fn gate_tomography(path: &ParameterPath, cfg: &GateRunConfig) -> Result<HolonomyMatrix> {
    let initial_basis = CatBasis::from_roots(&path.start_roots(), &cfg.space)?;
    let final_basis = CatBasis::from_roots(&path.end_roots(), &cfg.space)?;
    tomography_with(path, cfg, &cfg.schedule(path), &initial_basis, &final_basis)
}

fn tomography_with(
    path: &ParameterPath,
    cfg: &GateRunConfig,
    schedule: &Schedule,
    initial: &CatBasis,
    final_basis: &CatBasis,
) -> Result<HolonomyMatrix> {
    let d = initial.d;
    let zero = &initial.states[0];
    let mut blocks = Vec::with_capacity(d);
    for mu in 0..d {
        let x0 = initial.states[mu].outer(zero);
        let x = propagate_operator(&x0, cfg.kappa, path, schedule)?;
        blocks.push(dfs_block(&x, final_basis, BasisTag::Cat));
    }
    let herm = (&blocks[0] + blocks[0].adjoint()) * C64::from(0.5);
    let eig = herm.symmetric_eigen();
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &l)| if l > best.1 { (i, l) } else { best });
    if !(lambda > 1e-8) {
        return Err(Error::CoherenceLost(lambda.max(0.0)));
    }
    let u0: DVector<C64> = eig.eigenvectors.column(k) * C64::from(lambda.sqrt());
    let norm2 = u0.norm_squared();
    let mut u = DMatrix::zeros(d, d);
    for (mu, b) in blocks.iter().enumerate() {
        let col = b * &u0 / C64::from(norm2);
        u.set_column(mu, &col);
    }
    Ok(HolonomyMatrix::new(u, BasisTag::Cat))
}
