//! Berry connections of cat-basis families, the LME connection tensor,
//! path-ordered holonomies and the su(d) generator set.

mod generators;

pub use generators::{rank_check, su_d_generators, GeneratorSet};

use std::path::Path;

use nalgebra::DMatrix;

use crate::catcode::CatBasis;
use crate::error::{Error, Result};
use crate::fockspace::{ladder_operators, SpaceConfig, C64, ZERO};
use crate::gates::{BasisTag, CollisionGateSpec, HolonomyMatrix};
use crate::harness::io::fmt_num;
use crate::liouvillian::ConservedQuantity;

/// Default finite-difference step.
pub const DEFAULT_DELTA: f64 = 1e-3;
/// Relative Richardson tolerance for δ versus δ/2.
const RICHARDSON_TOL: f64 = 0.01;
/// Absolute floor for the Richardson comparison of vanishing connections.
const RICHARDSON_FLOOR: f64 = 1e-7;
/// Step-halving tolerance of the ordered exponential (operator norm).
const HOLONOMY_TOL: f64 = 1e-3;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    /// `|α|` at fixed phase.
    Modulus,
    /// `φ = arg α` at fixed modulus.
    Phase,
    /// Any other real coordinate of the roots.
    Coordinate,
}

impl Parameter {
    pub fn label(&self) -> &'static str {
        match self {
            Parameter::Modulus => "abs_alpha",
            Parameter::Phase => "arg_alpha",
            Parameter::Coordinate => "root_coordinate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugePolicy {
    /// Basis vectors used exactly as the family returns them.
    Raw,
    /// Each displaced vector re-phased so that `⟨μ_λ|μ_{λ±δ}⟩ > 0`.
    PhaseAligned,
}

impl GaugePolicy {
    /// Re-phasing is never applied to the φ-connection.
    pub fn for_parameter(p: Parameter) -> Self {
        match p {
            Parameter::Coordinate => GaugePolicy::PhaseAligned,
            _ => GaugePolicy::Raw,
        }
    }
}

/// `A^λ_{μσ} = i⟨μ_λ|∂_λ σ_λ⟩` at one parameter value.
#[derive(Debug, Clone)]
pub struct ConnectionSample {
    pub parameter: Parameter,
    pub lambda: f64,
    pub value: DMatrix<C64>,
    pub gauge: GaugePolicy,
    pub delta: f64,
    /// `‖A(δ) − A(δ/2)‖` before extrapolation.
    pub richardson_change: f64,
}

impl ConnectionSample {
    /// `‖A − A†‖`, zero for an orthonormal family up to discretization error.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.value - self.value.adjoint()).norm()
    }

    pub fn max_entry(&self) -> f64 {
        self.value.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.value.nrows();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m = m.max(self.value[(i, j)].norm());
                }
            }
        }
        m
    }
}

/// Writes `lambda,re_00,im_00,re_01,...` rows.
pub fn write_connection_csv(samples: &[ConnectionSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let d = samples.first().map_or(0, |s| s.value.nrows());
    let mut out = String::from("lambda");
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(",re_{i}{j},im_{i}{j}"));
        }
    }
    out.push('\n');
    for s in samples {
        out.push_str(&fmt_num(s.lambda));
        for i in 0..d {
            for j in 0..d {
                let z = s.value[(i, j)];
                out.push_str(&format!(",{},{}", fmt_num(z.re), fmt_num(z.im)));
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// A one-parameter family of steady bases.
pub trait BasisFamily {
    fn parameter(&self) -> Parameter;
    fn basis_at(&self, lambda: f64) -> Result<CatBasis>;
}

/// Symmetric cats `|μ_{re^{iφ}}⟩` with either r or φ free.
#[derive(Debug, Clone)]
pub struct PolarFamily {
    pub d: usize,
    pub parameter: Parameter,
    /// The coordinate that stays fixed.
    pub fixed: f64,
    pub space: SpaceConfig,
}

impl PolarFamily {
    pub fn modulus(d: usize, phi: f64, space: SpaceConfig) -> Self {
        Self { d, parameter: Parameter::Modulus, fixed: phi, space }
    }

    pub fn phase(d: usize, r: f64, space: SpaceConfig) -> Self {
        Self { d, parameter: Parameter::Phase, fixed: r, space }
    }
}

impl BasisFamily for PolarFamily {
    fn parameter(&self) -> Parameter {
        self.parameter
    }

    fn basis_at(&self, lambda: f64) -> Result<CatBasis> {
        match self.parameter {
            Parameter::Phase => CatBasis::polar(self.d, self.fixed, lambda, &self.space),
            _ => {
                if lambda < 0.0 {
                    return Err(Error::InvalidSpec(format!("negative modulus {lambda}")));
                }
                CatBasis::polar(self.d, lambda, self.fixed, &self.space)
            }
        }
    }
}

/// Any closure `λ ↦ roots`, with the basis built by `CatBasis::from_roots`.
pub struct RootFamily<F: Fn(f64) -> Vec<C64>> {
    pub roots: F,
    pub space: SpaceConfig,
}

impl<F: Fn(f64) -> Vec<C64>> BasisFamily for RootFamily<F> {
    fn parameter(&self) -> Parameter {
        Parameter::Coordinate
    }

    fn basis_at(&self, lambda: f64) -> Result<CatBasis> {
        CatBasis::from_roots(&(self.roots)(lambda), &self.space)
    }
}

fn aligned(reference: &CatBasis, moved: CatBasis) -> CatBasis {
    let mut moved = moved;
    for (r, m) in reference.states.iter().zip(moved.states.iter_mut()) {
        let ov = r.inner(m);
        if ov.norm() > 0.0 {
            *m = m.scaled(ov.conj() / ov.norm());
        }
    }
    moved
}

fn shifted(family: &dyn BasisFamily, center: &CatBasis, lambda: f64, gauge: GaugePolicy) -> Result<DMatrix<C64>> {
    let b = family.basis_at(lambda)?;
    Ok(match gauge {
        GaugePolicy::Raw => b.matrix(),
        GaugePolicy::PhaseAligned => aligned(center, b).matrix(),
    })
}

fn central_difference(family: &dyn BasisFamily, center: &CatBasis, lambda: f64, delta: f64, gauge: GaugePolicy) -> Result<DMatrix<C64>> {
    let plus = shifted(family, center, lambda + delta, gauge)?;
    let minus = shifted(family, center, lambda - delta, gauge)?;
    Ok((plus - minus) / C64::from(2.0 * delta))
}

/// Derivative of the basis matrix by Richardson-extrapolated central
/// differences, with the δ versus δ/2 change checked.
fn basis_derivative(
    family: &dyn BasisFamily,
    center: &CatBasis,
    lambda: f64,
    delta: f64,
    gauge: GaugePolicy,
    project: impl Fn(&DMatrix<C64>) -> DMatrix<C64>,
) -> Result<(DMatrix<C64>, f64)> {
    let coarse_raw = central_difference(family, center, lambda, delta, gauge)?;
    let fine_raw = central_difference(family, center, lambda, 0.5 * delta, gauge)?;
    let coarse = project(&coarse_raw);
    let fine = project(&fine_raw);
    let change = (&fine - &coarse).norm();
    // measured against ‖∂B‖: projected quantities such as A^{|α|} vanish
    let scale = fine_raw.norm().max(RICHARDSON_FLOOR / RICHARDSON_TOL);
    if change > RICHARDSON_TOL * scale {
        return Err(Error::StepTooCoarse(format!(
            "halving δ = {delta:.1e} changed the derivative by {change:.3e} (scale {scale:.3e})"
        )));
    }
    Ok(((fine * C64::from(4.0) - coarse) / C64::from(3.0), change))
}

/// `A^λ_{μσ} = i⟨μ_λ|∂_λ σ_λ⟩` by finite differences.
pub fn berry_connection(family: &dyn BasisFamily, lambda: f64, delta: f64) -> Result<ConnectionSample> {
    let gauge = GaugePolicy::for_parameter(family.parameter());
    let center = family.basis_at(lambda)?;
    let b = center.matrix();
    let (value, change) = basis_derivative(family, &center, lambda, delta, gauge, |db| b.adjoint() * db * I)?;
    Ok(ConnectionSample {
        parameter: family.parameter(),
        lambda,
        value,
        gauge,
        delta,
        richardson_change: change,
    })
}

/// `A^φ = −diag⟨μ_α|n̂|μ_α⟩` and `A^{|α|} = 0` for symmetric cats.
pub fn closed_form_connection(basis: &CatBasis, parameter: Parameter, cfg: &SpaceConfig) -> Result<DMatrix<C64>> {
    let d = basis.d;
    match parameter {
        Parameter::Modulus => Ok(DMatrix::zeros(d, d)),
        Parameter::Phase => {
            let n = ladder_operators(cfg).n;
            Ok(DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    -n.expectation(&basis.states[i])
                } else {
                    ZERO
                }
            }))
        }
        Parameter::Coordinate => Err(Error::InvalidSpec("no closed form for a generic root coordinate".into())),
    }
}

/// `𝒜^λ_{μμ′;σσ′} = i Tr{J†_{μμ′} ∂_λ(|σ⟩⟨σ′|)}`, stored flat with index
/// `((μ·d + μ′)·d + σ)·d + σ′`.
#[derive(Debug, Clone)]
pub struct LmeConnection {
    pub d: usize,
    pub lambda: f64,
    pub tensor: Vec<C64>,
    /// Ordinary connection at the same point.
    pub ordinary: DMatrix<C64>,
    /// Largest entry of `𝒜 − decomposition(A)`.
    pub decomposition_residual: f64,
    /// `max ‖P J P^⊥‖/‖J‖` over the conserved quantities.
    pub cross_talk: f64,
}

impl LmeConnection {
    pub fn get(&self, mu: usize, mu_p: usize, sigma: usize, sigma_p: usize) -> C64 {
        let d = self.d;
        self.tensor[((mu * d + mu_p) * d + sigma) * d + sigma_p]
    }
}

/// `δ_{μ′σ′}A_{μσ} − δ_{μσ}A*_{μ′σ′}`: the connection of `|σ⟩⟨σ′|`
/// transported by the ordinary connection of each factor.
pub fn decomposed_lme_tensor(a: &DMatrix<C64>) -> Vec<C64> {
    let d = a.nrows();
    let mut out = vec![ZERO; d * d * d * d];
    for mu in 0..d {
        for mp in 0..d {
            for s in 0..d {
                for sp in 0..d {
                    let mut v = ZERO;
                    if mp == sp {
                        v += a[(mu, s)];
                    }
                    if mu == s {
                        v -= a[(mp, sp)].conj();
                    }
                    out[((mu * d + mp) * d + s) * d + sp] = v;
                }
            }
        }
    }
    out
}

/// `‖P J P^⊥‖/‖J‖` with `P` the projector onto the span of `basis`.
pub fn cross_talk(j: &ConservedQuantity, basis: &CatBasis) -> f64 {
    let b = basis.matrix();
    let n = b.nrows();
    let p = &b * b.adjoint();
    let q = DMatrix::<C64>::identity(n, n) - &p;
    let jm = j.matrix.matrix();
    (&p * jm * q).norm() / jm.norm()
}

/// LME connection tensor at `lambda`, given conserved quantities computed
/// for `family.basis_at(lambda)`.
pub fn lme_berry_connection(
    family: &dyn BasisFamily,
    conserved: &[ConservedQuantity],
    lambda: f64,
    delta: f64,
) -> Result<LmeConnection> {
    let center = family.basis_at(lambda)?;
    let d = center.d;
    if conserved.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: conserved.len() });
    }
    let gauge = GaugePolicy::for_parameter(family.parameter());
    let b = center.matrix();
    // ∂(|σ⟩⟨σ′|) = |∂σ⟩⟨σ′| + |σ⟩⟨∂σ′|, so only the basis derivative is needed
    let (db, _) = basis_derivative(family, &center, lambda, delta, gauge, |m| m.clone())?;
    let ordinary = b.adjoint() * &db * I;
    let mut tensor = vec![ZERO; d * d * d * d];
    for j in conserved {
        let jd = j.matrix.matrix().adjoint();
        let jb = &jd * &b;
        let jdb = &jd * &db;
        for s in 0..d {
            for sp in 0..d {
                // Tr{J† |x⟩⟨y|} = ⟨y|J†|x⟩
                let t = b.column(sp).dotc(&jdb.column(s)) + db.column(sp).dotc(&jb.column(s));
                tensor[((j.mu * d + j.mu_prime) * d + s) * d + sp] = I * t;
            }
        }
    }
    let predicted = decomposed_lme_tensor(&ordinary);
    let decomposition_residual = tensor
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let cross = conserved.iter().map(|j| cross_talk(j, &center)).fold(0.0, f64::max);
    Ok(LmeConnection {
        d,
        lambda,
        tensor,
        ordinary,
        decomposition_residual,
        cross_talk: cross,
    })
}

fn expi(a: &DMatrix<C64>, dl: f64) -> DMatrix<C64> {
    (a * C64::new(0.0, dl)).exp()
}

/// `∏ exp(i A_k Δλ_k)`, later factors to the left.
pub fn ordered_exponential(samples: &[ConnectionSample], steps: &[f64]) -> Result<DMatrix<C64>> {
    if samples.len() != steps.len() {
        return Err(Error::DimensionMismatch { expected: samples.len(), found: steps.len() });
    }
    let d = samples.first().map_or(0, |s| s.value.nrows());
    let mut u = DMatrix::<C64>::identity(d, d);
    for (s, &dl) in samples.iter().zip(steps) {
        u = expi(&s.value, dl) * u;
    }
    Ok(u)
}

fn midpoint_product(family: &dyn BasisFamily, from: f64, to: f64, steps: usize, delta: f64) -> Result<DMatrix<C64>> {
    let h = (to - from) / steps as f64;
    let mut samples = Vec::with_capacity(steps);
    for k in 0..steps {
        samples.push(berry_connection(family, from + (k as f64 + 0.5) * h, delta)?);
    }
    ordered_exponential(&samples, &vec![h; steps])
}

/// Holonomy of one family segment `[from, to]`. The step count doubles
/// until the product changes by less than 1e−3 in operator norm; after
/// `max_doublings` the result is `StepTooCoarse`.
pub fn integrate_holonomy(family: &dyn BasisFamily, from: f64, to: f64, steps: usize, delta: f64) -> Result<DMatrix<C64>> {
    let d = family.basis_at(from)?.d;
    if from == to {
        return Ok(DMatrix::identity(d, d));
    }
    let max_doublings = 6;
    let mut n = steps.max(1);
    let mut prev = midpoint_product(family, from, to, n, delta)?;
    for _ in 0..max_doublings {
        n *= 2;
        let next = midpoint_product(family, from, to, n, delta)?;
        let change = (&next - &prev).svd(false, false).singular_values.max();
        if change < HOLONOMY_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::StepTooCoarse(format!(
        "ordered exponential still changing after {n} steps"
    )))
}

/// Berry holonomy of the symmetric collision gate in the cat basis of the
/// initial (and final) configuration.
pub fn collision_holonomy(spec: &CollisionGateSpec, alpha0: f64, d: usize, space: &SpaceConfig) -> Result<HolonomyMatrix> {
    if spec.gamma() != ZERO {
        return Err(Error::InvalidSpec("closed-form families cover the symmetric collision only".into()));
    }
    // with α_min > 0 the dynamical path expands along a spiral
    if spec.alpha_min != 0.0 {
        return Err(Error::InvalidSpec("collision holonomy needs alpha_min = 0".into()));
    }
    let steps = 16;
    let shrink = integrate_holonomy(&PolarFamily::modulus(d, 0.0, space.clone()), alpha0, 0.0, steps, DEFAULT_DELTA)?;
    let turn = integrate_holonomy(&PolarFamily::phase(d, 0.0, space.clone()), 0.0, spec.phi, steps, DEFAULT_DELTA)?;
    let expand = integrate_holonomy(&PolarFamily::modulus(d, spec.phi, space.clone()), 0.0, alpha0, steps, DEFAULT_DELTA)?;
    let back = integrate_holonomy(&PolarFamily::phase(d, alpha0, space.clone()), spec.phi, 0.0, steps, DEFAULT_DELTA)?;
    Ok(HolonomyMatrix::new(back * expand * turn * shrink, BasisTag::Cat))
}
