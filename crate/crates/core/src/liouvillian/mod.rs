//! Jump operator, Lindblad superoperator, time-dependent integration and
//! spectral analysis of `ρ̇ = FρF† − ½{F†F, ρ}`.
//!
//! Vectorization convention: column stacking, `vec(AXB) = (Bᵀ ⊗ A) vec(X)`,
//! which coincides with nalgebra's column-major storage.

pub(crate) mod banded;
mod evolve;
mod krylov;
mod spectral;

pub use evolve::{
    evolve, propagate_operator, CorrectionLog, Integrator, Schedule, Trajectory, TrajectorySample,
};
pub use spectral::{
    conserved_quantities, dissipation_gap, dissipation_gap_with_null_dim, spectrum, steady_space, ConservedQuantity, Spectrum,
    SteadySpace, NULL_TOL,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fockspace::{hermiticity_residual, Operator, SpaceConfig, StateVector, C64};
use banded::Banded;

/// Overall rate and roots of `F = √κ ∏_ν (a − α_ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpec {
    pub kappa: f64,
    pub roots: Vec<C64>,
}

impl JumpSpec {
    pub fn new(kappa: f64, roots: Vec<C64>) -> Result<Self> {
        let spec = Self { kappa, roots };
        spec.validate()?;
        Ok(spec)
    }

    /// Roots `α·e^{i2πν/d}` on a circle.
    pub fn symmetric(kappa: f64, d: usize, alpha: C64) -> Result<Self> {
        Self::new(kappa, symmetric_roots(d, alpha))
    }

    pub fn d(&self) -> usize {
        self.roots.len()
    }

    pub fn max_abs_root(&self) -> f64 {
        self.roots.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.roots.is_empty() {
            return Err(Error::InvalidSpec("jump operator needs at least one root".into()));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// `α·e^{i2πν/d}` for `ν = 0..d`.
pub fn symmetric_roots(d: usize, alpha: C64) -> Vec<C64> {
    (0..d)
        .map(|nu| alpha * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu as f64 / d as f64))
        .collect()
}

/// `F = √κ ∏_ν (a − α_ν I)`.
pub fn build_jump(spec: &JumpSpec, cfg: &SpaceConfig) -> Result<Operator> {
    spec.validate()?;
    if !cfg.is_adequate_for(spec.max_abs_root()) {
        return Err(Error::Truncation(format!(
            "n_trunc = {} below adequacy bound {} for max |α| = {:.3}",
            cfg.n_trunc,
            SpaceConfig::adequate_dim(spec.max_abs_root()),
            spec.max_abs_root()
        )));
    }
    Ok(Operator::new(
        Banded::jump(spec.kappa, &spec.roots, cfg.n_trunc).to_dense(),
    ))
}

/// Density matrix on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    entries: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity (1e-10), unit trace (1e-8) and positivity
    /// (min eigenvalue ≥ −1e-8).
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = hermiticity_residual(&entries);
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("Hermiticity residual {herm:.3e}")));
        }
        let tr = entries.trace();
        if (tr - C64::from(1.0)).norm() > 1e-8 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = hermitian_part(&entries).symmetric_eigenvalues().min();
        if min_eig < -1e-8 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<C64>) -> Self {
        Self { entries }
    }

    pub fn pure(state: &StateVector) -> Self {
        let psi = state.amplitudes() / C64::from(state.norm());
        Self {
            entries: &psi * psi.adjoint(),
        }
    }

    /// Σ_k p_k |ψ_k⟩⟨ψ_k|
    pub fn mixture(parts: &[(f64, &StateVector)]) -> Result<Self> {
        let n = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?
            .1
            .dim();
        let mut m = DMatrix::zeros(n, n);
        for (p, s) in parts {
            m += Self::pure(s).entries * C64::from(*p);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        (self.entries.clone() * op.matrix()).trace()
    }

    /// Probability on levels ≥ 0.9·n_trunc.
    pub fn tail_weight(&self, cfg: &SpaceConfig) -> f64 {
        (cfg.tail_start()..self.dim())
            .map(|k| self.entries[(k, k)].re)
            .sum()
    }

    /// ½‖ρ − σ‖₁
    pub fn trace_distance(&self, other: &DensityOperator) -> f64 {
        let diff = hermitian_part(&(&self.entries - &other.entries));
        0.5 * diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn fidelity_with_pure(&self, state: &StateVector) -> f64 {
        state
            .amplitudes()
            .dotc(&(&self.entries * state.amplitudes()))
            .re
    }

    pub fn vectorized(&self) -> DVector<C64> {
        DVector::from_column_slice(self.entries.as_slice())
    }
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Dense Liouvillian acting on column-vectorized operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    entries: DMatrix<C64>,
    n: usize,
}

impl Superoperator {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Fock-space dimension the superoperator acts on.
    pub fn space_dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let v = &self.entries * DVector::from_column_slice(rho.as_slice());
        DMatrix::from_column_slice(self.n, self.n, v.as_slice())
    }

    /// `L†[X]` (Heisenberg-picture action).
    pub fn apply_adjoint(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let v = self.entries.adjoint() * DVector::from_column_slice(x.as_slice());
        DMatrix::from_column_slice(self.n, self.n, v.as_slice())
    }

    /// Largest entry of `vec(I)† L`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for col in 0..n * n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += self.entries[(k * n + k, col)];
            }
            worst = worst.max(acc.norm());
        }
        worst
    }
}

/// `L = F̄⊗F − ½(I⊗F†F + (F†F)ᵀ⊗I)`.
pub fn liouvillian_matrix(f: &Operator) -> Superoperator {
    let n = f.dim();
    let fm = f.matrix();
    let g = fm.adjoint() * fm;
    let nn = n * n;
    let mut l = DMatrix::zeros(nn, nn);
    // F̄ ⊗ F: entry [(b·n + a), (d·n + c)] = conj(F[b,d]) F[a,c]
    for d in 0..n {
        for b in 0..n {
            let fb = fm[(b, d)].conj();
            if fb == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n {
                for a in 0..n {
                    l[(b * n + a, d * n + c)] += fb * fm[(a, c)];
                }
            }
        }
    }
    for blk in 0..n {
        for c in 0..n {
            for a in 0..n {
                // I ⊗ G
                l[(blk * n + a, blk * n + c)] -= g[(a, c)] * 0.5;
                // Gᵀ ⊗ I
                l[(a * n + blk, c * n + blk)] -= g[(c, a)] * 0.5;
            }
        }
    }
    Superoperator { entries: l, n }
}

/// Time-parametrized root configuration driving the jump operator.
pub trait RootTrajectory: Sync {
    fn d(&self) -> usize;
    /// Total duration in units of 1/κ.
    fn duration(&self) -> f64;
    fn roots_at(&self, t: f64) -> Vec<C64>;
}

/// Time-independent roots held for a fixed duration.
#[derive(Debug, Clone)]
pub struct StaticRoots {
    pub roots: Vec<C64>,
    pub duration: f64,
}

impl RootTrajectory for StaticRoots {
    fn d(&self) -> usize {
        self.roots.len()
    }
    fn duration(&self) -> f64 {
        self.duration
    }
    fn roots_at(&self, _t: f64) -> Vec<C64> {
        self.roots.clone()
    }
}
