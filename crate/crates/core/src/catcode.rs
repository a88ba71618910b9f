//! Cat-state bases `|μ_α⟩ ∝ Π_μ|α⟩`, number-mod-d projectors and the
//! decoherence-free-subspace projector.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fockspace::{coherent_amplitudes, coherent_state, Operator, SpaceConfig, StateVector, C64, ONE, ZERO};

/// Regime threshold on `2|α| sin(π/d)` above which gate-quality claims apply.
pub const WELL_SEPARATED: f64 = 4.0;

/// `Π_μ = Σ_n |dn+μ⟩⟨dn+μ|`.
pub fn number_projector(mu: usize, d: usize, cfg: &SpaceConfig) -> Result<Operator> {
    if d == 0 || mu >= d {
        return Err(Error::InvalidSpec(format!("need 0 ≤ μ < d, got μ = {mu}, d = {d}")));
    }
    let diag = DVector::from_fn(cfg.n_trunc, |n, _| if n % d == mu { ONE } else { ZERO });
    Operator::hermitian(DMatrix::from_diagonal(&diag))
}

/// Normalized `Π_μ|α⟩`.
pub fn cat_state(mu: usize, alpha: C64, d: usize, cfg: &SpaceConfig) -> Result<StateVector> {
    if d == 0 || mu >= d {
        return Err(Error::InvalidSpec(format!("need 0 ≤ μ < d, got μ = {mu}, d = {d}")));
    }
    if alpha == ZERO {
        if mu > 0 {
            return Err(Error::DegenerateInput(format!(
                "Π_{mu}|0⟩ vanishes; use the Fock state |{mu}⟩ as the α → 0 limit"
            )));
        }
        return StateVector::fock(0, cfg);
    }
    // tail check on the parent coherent state
    coherent_state(alpha, cfg)?;
    let mut amps = coherent_amplitudes(alpha, cfg.n_trunc);
    for (n, c) in amps.iter_mut().enumerate() {
        if n % d != mu {
            *c = ZERO;
        }
    }
    let norm = amps.norm();
    if norm <= 1e-12 {
        return Err(Error::DegenerateInput(format!(
            "‖Π_{mu}|α⟩‖ = {norm:.3e} too small at α = {alpha}"
        )));
    }
    Ok(StateVector::from_amplitudes(amps / C64::from(norm)))
}

/// `N_μ = √(½[1 + (−1)^μ e^{−2|α|²}])` of the two-component cat.
pub fn two_cat_normalization(mu: usize, alpha: C64) -> f64 {
    let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
    (0.5 * (1.0 + sign * (-2.0 * alpha.norm_sqr()).exp())).sqrt()
}

/// `e^{−|α|²/2}/N_μ · Σ_n α^{2n+μ}/√(2n+μ)! |2n+μ⟩`, truncated.
pub fn two_cat_closed_form(mu: usize, alpha: C64, cfg: &SpaceConfig) -> StateVector {
    let norm = two_cat_normalization(mu, alpha);
    let coh = coherent_amplitudes(alpha, cfg.n_trunc);
    let amps = DVector::from_fn(cfg.n_trunc, |n, _| {
        if n % 2 == mu % 2 {
            coh[n] / norm
        } else {
            ZERO
        }
    });
    StateVector::from_amplitudes(amps)
}

/// Orthonormal cat basis of the symmetric `d`-root configuration.
#[derive(Debug, Clone)]
pub struct CatBasis {
    pub d: usize,
    pub alpha: C64,
    pub states: Vec<StateVector>,
    /// `2|α| sin(π/d)`
    pub regime_metric: f64,
}

pub fn regime_metric(alpha: C64, d: usize) -> f64 {
    if d < 2 {
        return f64::INFINITY;
    }
    2.0 * alpha.norm() * (PI / d as f64).sin()
}

impl CatBasis {
    /// `|μ_α⟩ = Π_μ|α⟩/‖·‖`. At α = 0 the Fock-state limit `|μ⟩` is used.
    pub fn symmetric(d: usize, alpha: C64, cfg: &SpaceConfig) -> Result<Self> {
        if alpha == ZERO {
            return Self::polar(d, 0.0, 0.0, cfg);
        }
        let states = (0..d)
            .map(|mu| cat_state(mu, alpha, d, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            alpha,
            states,
            regime_metric: regime_metric(alpha, d),
        })
    }

    /// Polar parametrization `α = r e^{iφ}`. At `r = 0` the limit states are
    /// `e^{iμφ}|μ⟩`, which keeps the gauge continuous in `r`.
    pub fn polar(d: usize, r: f64, phi: f64, cfg: &SpaceConfig) -> Result<Self> {
        let alpha = C64::from_polar(r, phi);
        if r > 0.0 {
            return Self::symmetric(d, alpha, cfg);
        }
        if d > cfg.n_trunc {
            return Err(Error::Truncation(format!("d = {d} exceeds n_trunc")));
        }
        let states = (0..d)
            .map(|mu| {
                StateVector::fock(mu, cfg).map(|s| s.scaled(C64::from_polar(1.0, mu as f64 * phi)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            alpha,
            states,
            regime_metric: 0.0,
        })
    }

    /// `D_γ|μ_α⟩` for the two roots `γ ± α`.
    pub fn displaced(gamma: C64, alpha: C64, cfg: &SpaceConfig) -> Result<Self> {
        let states = (0..2)
            .map(|mu| displaced_cat(gamma, alpha, mu, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: 2,
            alpha,
            states,
            regime_metric: regime_metric(alpha, 2),
        })
    }

    /// Steady basis of an arbitrary root configuration: coherent state for
    /// one root, symmetric cats when `α_ν = α_0·e^{i2πν/d}`, displaced cats
    /// for two roots, and Gram–Schmidt orthonormalized coherent states
    /// otherwise (that last choice fixes one gauge among many).
    pub fn from_roots(roots: &[C64], cfg: &SpaceConfig) -> Result<Self> {
        let d = roots.len();
        if d == 0 {
            return Err(Error::InvalidSpec("no roots".into()));
        }
        if d == 1 {
            return Ok(Self {
                d,
                alpha: roots[0],
                states: vec![coherent_state(roots[0], cfg)?],
                regime_metric: f64::INFINITY,
            });
        }
        let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let symmetric = roots.iter().enumerate().all(|(nu, z)| {
            (z - roots[0] * C64::from_polar(1.0, 2.0 * PI * nu as f64 / d as f64)).norm() <= 1e-12 * scale
        });
        if symmetric {
            return Self::symmetric(d, roots[0], cfg);
        }
        if d == 2 {
            let gamma = (roots[0] + roots[1]) * 0.5;
            let alpha = (roots[0] - roots[1]) * 0.5;
            return Self::displaced(gamma, alpha, cfg);
        }
        let mut states: Vec<StateVector> = Vec::with_capacity(d);
        for &z in roots {
            let mut v = coherent_state(z, cfg)?.into_amplitudes();
            for s in &states {
                let proj = s.amplitudes().dotc(&v);
                v -= s.amplitudes() * proj;
            }
            states.push(StateVector::normalized(v).map_err(|_| {
                Error::DegenerateInput("coincident roots give a rank-deficient steady basis".into())
            })?);
        }
        Ok(Self {
            d,
            alpha: roots[0],
            states,
            regime_metric: f64::NAN,
        })
    }

    /// Columns are the basis states.
    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.states[0].dim();
        DMatrix::from_fn(n, self.d, |i, mu| self.states[mu].amplitudes()[i])
    }

    /// Largest |⟨μ|ν⟩ − δ_μν|.
    pub fn orthonormality_residual(&self) -> f64 {
        let b = self.matrix();
        let g = b.adjoint() * &b - DMatrix::identity(self.d, self.d);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coherent-like basis `(1/√d) Σ_μ e^{i2πμν/d} |μ_α⟩`, one column per ν.
    pub fn coherent_like(&self) -> DMatrix<C64> {
        self.matrix() * fourier_matrix(self.d)
    }
}

/// `W[μ, ν] = e^{i2πμν/d}/√d`.
pub fn fourier_matrix(d: usize) -> DMatrix<C64> {
    let s = 1.0 / (d as f64).sqrt();
    DMatrix::from_fn(d, d, |mu, nu| {
        C64::from_polar(s, 2.0 * PI * (mu * nu) as f64 / d as f64)
    })
}

/// `max_μ 1 − |⟨μ_α| (1/√d)Σ_ν e^{−i2πμν/d}|αe_ν⟩|`.
pub fn fourier_relation_check(alpha: C64, d: usize, cfg: &SpaceConfig) -> Result<f64> {
    let basis = CatBasis::symmetric(d, alpha, cfg)?;
    let coherents = (0..d)
        .map(|nu| coherent_state(alpha * C64::from_polar(1.0, 2.0 * PI * nu as f64 / d as f64), cfg))
        .collect::<Result<Vec<_>>>()?;
    let s = 1.0 / (d as f64).sqrt();
    let mut worst = 0.0f64;
    for (mu, cat) in basis.states.iter().enumerate() {
        let mut v = DVector::<C64>::zeros(cfg.n_trunc);
        for (nu, coh) in coherents.iter().enumerate() {
            let w = C64::from_polar(s, -2.0 * PI * (mu * nu) as f64 / d as f64);
            v += coh.amplitudes() * w;
        }
        worst = worst.max(1.0 - cat.amplitudes().dotc(&v).norm());
    }
    Ok(worst)
}

/// `P = Σ_μ |μ⟩⟨μ|` over a basis.
pub fn dfs_projector(basis: &CatBasis) -> Operator {
    let b = basis.matrix();
    Operator::new(&b * b.adjoint())
}

/// `D_γ|μ_α⟩`, μ ∈ {0, 1}: steady basis of `F ∝ (a − γ − α)(a − γ + α)`.
pub fn displaced_cat(gamma: C64, alpha: C64, mu: usize, cfg: &SpaceConfig) -> Result<StateVector> {
    if mu > 1 {
        return Err(Error::InvalidSpec(format!("displaced cats need μ ∈ {{0, 1}}, got {mu}")));
    }
    let reach = gamma.norm() + alpha.norm();
    if !cfg.is_adequate_for(reach) {
        return Err(Error::Truncation(format!(
            "|γ| + |α| = {reach:.3} needs n_trunc ≥ {}",
            SpaceConfig::adequate_dim(reach)
        )));
    }
    let sign = if mu == 0 { 1.0 } else { -1.0 };
    let amps = if alpha == ZERO {
        // D_γ|0⟩ = |γ⟩ and D_γ|1⟩ = (a† − γ*)|γ⟩
        let coh = coherent_amplitudes(gamma, cfg.n_trunc);
        if mu == 0 {
            coh
        } else {
            DVector::from_fn(cfg.n_trunc, |n, _| {
                let raised = if n > 0 { coh[n - 1] * (n as f64).sqrt() } else { ZERO };
                raised - gamma.conj() * coh[n]
            })
        }
    } else {
        // Π_μ|α⟩ = ½(|α⟩ ± |−α⟩) and D_γ|β⟩ = e^{i Im(γβ*)}|γ+β⟩
        let twist = (gamma * alpha.conj()).im;
        coherent_amplitudes(gamma + alpha, cfg.n_trunc) * C64::from_polar(1.0, twist)
            + coherent_amplitudes(gamma - alpha, cfg.n_trunc) * C64::from_polar(sign, -twist)
    };
    StateVector::normalized(amps)
}

/// `(|α₁⟩ + (−1)^μ e^{i Im(α₁α₂*)}|α₂⟩)/√2` with `α₁,₂ = γ ± α`.
pub fn displaced_superposition(gamma: C64, alpha: C64, mu: usize, cfg: &SpaceConfig) -> Result<StateVector> {
    let (a1, a2) = (gamma + alpha, gamma - alpha);
    let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
    let phase = C64::from_polar(sign, (a1 * a2.conj()).im);
    let v = coherent_state(a1, cfg)?.amplitudes() + coherent_state(a2, cfg)?.amplitudes() * phase;
    Ok(StateVector::from_amplitudes(v / C64::from(2f64.sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{parity, rotation};
    use crate::liouvillian::{build_jump, JumpSpec};

    fn cfg(n: usize) -> SpaceConfig {
        SpaceConfig::with_dim(n).unwrap()
    }

    #[test]
    fn projectors_complete_and_orthogonal() {
        let c = cfg(17);
        for d in 1..=4 {
            let ps: Vec<_> = (0..d).map(|mu| number_projector(mu, d, &c).unwrap()).collect();
            let sum = ps.iter().fold(DMatrix::<C64>::zeros(17, 17), |acc, p| acc + p.matrix());
            assert_eq!(sum, DMatrix::identity(17, 17));
            for (i, p) in ps.iter().enumerate() {
                for (j, q) in ps.iter().enumerate() {
                    let prod = p.matrix() * q.matrix();
                    if i == j {
                        assert_eq!(&prod, p.matrix());
                    } else {
                        assert_eq!(prod.norm(), 0.0);
                    }
                }
            }
        }
        let diff = number_projector(0, 2, &c).unwrap().matrix() - number_projector(1, 2, &c).unwrap().matrix();
        assert_eq!(&diff, parity(&c).matrix());
        assert!(number_projector(2, 2, &c).is_err());
    }

    #[test]
    fn small_alpha_cats_approach_fock_states() {
        let c = cfg(20);
        for d in 1..=3 {
            for mu in 0..d {
                let cat = cat_state(mu, C64::from(1e-3), d, &c).unwrap();
                assert!(cat.amplitudes()[mu].norm() > 1.0 - 1e-5);
            }
        }
        assert!(matches!(cat_state(1, ZERO, 2, &c), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn two_component_normalization() {
        // N_0(α=1) = √(½(1+e^{−2})), evaluated independently
        let n0 = two_cat_normalization(0, C64::from(1.0));
        assert!((n0 - 0.753_437_2).abs() < 1e-6);
        let c = cfg(50);
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            for mu in 0..2 {
                let proj = cat_state(mu, C64::from(alpha), 2, &c).unwrap();
                let closed = two_cat_closed_form(mu, C64::from(alpha), &c);
                assert!((proj.amplitudes() - closed.amplitudes()).norm() < 1e-10);
            }
        }
        // direct projector norm
        let coh = coherent_state(C64::from(1.0), &c).unwrap();
        let p0 = number_projector(0, 2, &c).unwrap();
        assert!((p0.apply(&coh).norm() - n0).abs() < 1e-10);
    }

    #[test]
    fn large_alpha_cat_is_two_coherent_superposition() {
        let c = cfg(40);
        let alpha = C64::from(3.0);
        let cat = cat_state(0, alpha, 2, &c).unwrap();
        let sup = (coherent_state(alpha, &c).unwrap().amplitudes()
            + coherent_state(-alpha, &c).unwrap().amplitudes())
            / C64::from(2f64.sqrt());
        assert!(cat.amplitudes().dotc(&sup).norm() > 1.0 - 1e-6);
    }

    #[test]
    fn fourier_relation_by_regime() {
        assert!(fourier_relation_check(C64::from(3.0), 2, &cfg(40)).unwrap() < 1e-6);
        assert!(fourier_relation_check(C64::from(3.0), 3, &cfg(40)).unwrap() < 1e-4);
        assert!(fourier_relation_check(C64::from(0.3), 2, &cfg(20)).unwrap() > 0.1);
    }

    #[test]
    fn dfs_projector_properties() {
        let c = cfg(30);
        let alpha = C64::from(2.0);
        let b = CatBasis::symmetric(2, alpha, &c).unwrap();
        assert!(b.orthonormality_residual() < 1e-10);
        let p = dfs_projector(&b);
        let tr = p.matrix().trace();
        assert!((tr - C64::from(2.0)).norm() < 1e-10);
        assert!((p.matrix() * p.matrix() - p.matrix()).norm() < 1e-10);
        let phi = 0.7;
        let rotated = dfs_projector(&CatBasis::symmetric(2, alpha * C64::from_polar(1.0, phi), &c).unwrap());
        let r = rotation(phi, &c);
        let conj = r.matrix() * p.matrix() * r.matrix().adjoint();
        assert!((rotated.matrix() - conj).norm() < 1e-10);
        let f = build_jump(&JumpSpec::symmetric(1.0, 2, alpha).unwrap(), &c).unwrap();
        let g = f.matrix().adjoint() * f.matrix();
        assert!((p.matrix() * g * p.matrix()).norm() < 1e-8);
    }

    #[test]
    fn polar_basis_is_continuous_at_origin() {
        let c = cfg(20);
        let phi = 0.4;
        let zero = CatBasis::polar(3, 0.0, phi, &c).unwrap();
        let small = CatBasis::polar(3, 1e-4, phi, &c).unwrap();
        for mu in 0..3 {
            let ov = zero.states[mu].inner(&small.states[mu]);
            assert!((ov - ONE).norm() < 1e-6);
        }
    }

    #[test]
    fn displaced_cats() {
        let c = cfg(60);
        let alpha = C64::from(2.0);
        for mu in 0..2 {
            let plain = displaced_cat(ZERO, alpha, mu, &c).unwrap();
            assert!((plain.amplitudes() - cat_state(mu, alpha, 2, &c).unwrap().amplitudes()).norm() < 1e-10);
            // Fock-state limit against the matrix-exponential displacement
            let g = C64::new(0.5, -0.3);
            let dm = crate::fockspace::displacement(g, &c).unwrap();
            let direct = dm.apply(&StateVector::fock(mu, &c).unwrap());
            let limit = displaced_cat(g, ZERO, mu, &c).unwrap();
            assert!(1.0 - direct.inner(&limit).norm() < 1e-10);
        }
        let gamma = C64::from(2.0);
        let dc = displaced_cat(gamma, alpha, 0, &c).unwrap();
        let sup = displaced_superposition(gamma, alpha, 0, &c).unwrap();
        assert!(1.0 - dc.inner(&sup).norm() < 1e-4);
        let f = build_jump(&JumpSpec::new(1.0, vec![gamma + alpha, gamma - alpha]).unwrap(), &c).unwrap();
        let r = f.apply(&dc).norm();
        assert!(r < 1e-5, "residual {r:e}");
        assert!(matches!(displaced_cat(C64::from(3.0), alpha, 0, &cfg(30)), Err(Error::Truncation(_))));
    }
}
