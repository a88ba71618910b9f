//! Truncated Fock-space linear algebra.
//!
//! States live on levels `|0⟩ … |n_trunc−1⟩`. Operators are dense
//! column-major complex matrices, which is also the layout used for the
//! column-vectorized density operators of the Liouvillian.

mod wigner;

pub use wigner::{wigner, PhaseGrid, WignerGrid};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Truncation of the oscillator Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceConfig {
    pub n_trunc: usize,
    /// Largest probability tolerated on the top 10% of levels.
    pub tail_tol: f64,
}

impl SpaceConfig {
    /// Impurities at κT of a few hundred are still truncation-limited at
    /// 1e−6.
    pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

    pub fn new(n_trunc: usize, tail_tol: f64) -> Result<Self> {
        if n_trunc < 2 {
            return Err(Error::InvalidSpec(format!(
                "n_trunc must be at least 2, got {n_trunc}"
            )));
        }
        if !(tail_tol >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "tail_tol must be nonnegative, got {tail_tol}"
            )));
        }
        Ok(Self { n_trunc, tail_tol })
    }

    pub fn with_dim(n_trunc: usize) -> Result<Self> {
        Self::new(n_trunc, Self::DEFAULT_TAIL_TOL)
    }

    /// Smallest truncation satisfying `n ≥ |α|² + 5|α| + 5`.
    pub fn adequate_dim(max_abs_alpha: f64) -> usize {
        let a = max_abs_alpha.abs();
        ((a * a + 5.0 * a + 5.0).ceil() as usize).max(2)
    }

    /// Smallest truncation that satisfies the adequacy rule and keeps the
    /// tail weight of `|max_abs_alpha⟩` within `tail_tol`. The rule alone
    /// is not enough for the default tolerance above |α| ≈ 3.
    pub fn sufficient(max_abs_alpha: f64, tail_tol: f64) -> Result<Self> {
        let mut n = Self::adequate_dim(max_abs_alpha);
        loop {
            let cfg = Self::new(n, tail_tol)?;
            if coherent_state(C64::from(max_abs_alpha.abs()), &cfg).is_ok() {
                return Ok(cfg);
            }
            n += 1;
        }
    }

    pub fn is_adequate_for(&self, max_abs_alpha: f64) -> bool {
        self.n_trunc >= Self::adequate_dim(max_abs_alpha)
    }

    /// First level counted as "tail" (levels ≥ 0.9·n_trunc).
    pub fn tail_start(&self) -> usize {
        ((0.9 * self.n_trunc as f64).ceil() as usize).min(self.n_trunc - 1)
    }

    pub fn dim(&self) -> usize {
        self.n_trunc
    }
}

/// Ket over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    /// Normalizes the given amplitudes; fails on a zero vector.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 1e-300) {
            return Err(Error::DegenerateInput("zero state vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::from(norm),
        })
    }

    pub fn fock(level: usize, cfg: &SpaceConfig) -> Result<Self> {
        if level >= cfg.n_trunc {
            return Err(Error::Truncation(format!(
                "Fock level {level} outside truncation {}",
                cfg.n_trunc
            )));
        }
        let mut v = DVector::zeros(cfg.n_trunc);
        v[level] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tail_weight(&self, cfg: &SpaceConfig) -> f64 {
        self.amplitudes
            .iter()
            .skip(cfg.tail_start())
            .map(|c| c.norm_sqr())
            .sum()
    }

    pub fn scaled(&self, factor: C64) -> StateVector {
        StateVector {
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// `|self⟩⟨other|`
    pub fn outer(&self, other: &StateVector) -> DMatrix<C64> {
        &self.amplitudes * other.amplitudes.adjoint()
    }

    /// Rows `(n, Re c_n, Im c_n)` for CSV amplitude dumps.
    pub fn amplitude_rows(&self) -> Vec<(usize, f64, f64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| (n, c.re, c.im))
            .collect()
    }
}

/// Dense operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: DMatrix<C64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(entries: DMatrix<C64>) -> Self {
        assert!(entries.is_square(), "operators must be square");
        Self {
            entries,
            hermitian: false,
        }
    }

    /// Wraps a matrix asserted to be Hermitian to within 1e-12.
    pub fn hermitian(entries: DMatrix<C64>) -> Result<Self> {
        let residual = hermiticity_residual(&entries);
        if residual >= 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "operator flagged Hermitian has |M - M†| = {residual:.3e}"
            )));
        }
        Ok(Self {
            entries,
            hermitian: true,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector::from_amplitudes(&self.entries * state.amplitudes())
    }

    pub fn compose(&self, other: &Operator) -> Operator {
        Operator::new(&self.entries * &other.entries)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator::new(&self.entries * &other.entries - &other.entries * &self.entries)
    }

    /// ⟨ψ|O|ψ⟩
    pub fn expectation(&self, state: &StateVector) -> C64 {
        state.amplitudes().dotc(&(&self.entries * state.amplitudes()))
    }

    /// Largest entrywise |M − M†|.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.entries)
    }

    /// Largest entrywise |(U†U − I)_{ij}| restricted to `levels × levels`.
    pub fn unitarity_residual(&self, levels: usize) -> f64 {
        let k = levels.min(self.dim());
        let uu = self.entries.adjoint() * &self.entries;
        let mut worst = 0.0f64;
        for j in 0..k {
            for i in 0..k {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((uu[(i, j)] - target).norm());
            }
        }
        worst
    }
}

pub(crate) fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Lowering, raising and number operators.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: Operator,
    pub a_dag: Operator,
    pub n: Operator,
}

/// `a|n⟩ = √n|n−1⟩`, `a† = (a)†`, `n̂ = a†a`.
pub fn ladder_operators(cfg: &SpaceConfig) -> Ladder {
    let dim = cfg.n_trunc;
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    let a_dag = a.adjoint();
    let number = DMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| C64::from(n as f64)));
    Ladder {
        a: Operator::new(a),
        a_dag: Operator::new(a_dag),
        n: Operator {
            entries: number,
            hermitian: true,
        },
    }
}

/// Unnormalized coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!` via the
/// recurrence `c_{n+1} = c_n α/√(n+1)`.
pub(crate) fn coherent_amplitudes(alpha: C64, dim: usize) -> DVector<C64> {
    let mut amps = DVector::zeros(dim);
    let mut c = C64::from((-0.5 * alpha.norm_sqr()).exp());
    for n in 0..dim {
        amps[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    amps
}

/// Normalized truncated coherent state `|α⟩`.
pub fn coherent_state(alpha: C64, cfg: &SpaceConfig) -> Result<StateVector> {
    let state = StateVector::normalized(coherent_amplitudes(alpha, cfg.n_trunc))?;
    let tail = state.tail_weight(cfg);
    if tail > cfg.tail_tol {
        return Err(Error::Truncation(format!(
            "coherent state |{alpha}⟩ has tail weight {tail:.3e} > {:.1e} at n_trunc = {}",
            cfg.tail_tol, cfg.n_trunc
        )));
    }
    Ok(state)
}

/// `D_γ = exp(γa† − γ*a)` by Padé scaling-and-squaring.
pub fn displacement(gamma: C64, cfg: &SpaceConfig) -> Result<Operator> {
    let ladder = ladder_operators(cfg);
    let generator = ladder.a_dag.matrix() * gamma - ladder.a.matrix() * gamma.conj();
    let d = generator.exp();
    let vacuum_image = d.column(0).into_owned();
    let target = coherent_state(gamma, cfg)?;
    let err = (vacuum_image - target.amplitudes()).norm();
    if err > 1e-6 {
        return Err(Error::Truncation(format!(
            "‖D_γ|0⟩ − |γ⟩‖ = {err:.3e} for γ = {gamma} at n_trunc = {}",
            cfg.n_trunc
        )));
    }
    Ok(Operator::new(d))
}

/// `R_φ = exp(iφn̂)`, exactly diagonal.
pub fn rotation(phi: f64, cfg: &SpaceConfig) -> Operator {
    let diag = DVector::from_fn(cfg.n_trunc, |n, _| C64::from_polar(1.0, phi * n as f64));
    Operator::new(DMatrix::from_diagonal(&diag))
}

/// Photon-parity operator `exp(iπn̂)`.
pub fn parity(cfg: &SpaceConfig) -> Operator {
    let diag = DVector::from_fn(cfg.n_trunc, |n, _| {
        if n % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    });
    Operator {
        entries: DMatrix::from_diagonal(&diag),
        hermitian: true,
    }
}
