//! Adiabatic driving modelled as a dense product of DFS projectors.

use nalgebra::DMatrix;

use crate::catcode::{dfs_projector, CatBasis};
use crate::error::{Error, Result};
use crate::fockspace::{rotation, Operator, SpaceConfig, C64};

/// `S_φ = P_{αe^{iφ}} ··· P_{(2/M)αe^{iφ}} P_{(1/M)αe^{iφ}}` for the
/// symmetric d-root configuration.
pub fn zeno_product(phi: f64, alpha: C64, d: usize, m: usize, cfg: &SpaceConfig) -> Result<Operator> {
    if m == 0 {
        return Err(Error::InvalidSpec("projector product needs M ≥ 1".into()));
    }
    let n = cfg.n_trunc;
    let mut s = DMatrix::<C64>::identity(n, n);
    for k in 1..=m {
        let r = alpha.norm() * k as f64 / m as f64;
        let basis = CatBasis::polar(d, r, alpha.arg() + phi, cfg)?;
        s = dfs_projector(&basis).matrix() * s;
    }
    Ok(Operator::new(s))
}

/// `max_{ψ ∈ DFS(α)} ‖(R_φ† S_φ S_0† − S_0 R_φ† S_0†)ψ‖` over unit ψ.
pub fn zeno_identity_residual(phi: f64, alpha: C64, d: usize, m: usize, cfg: &SpaceConfig) -> Result<f64> {
    let s_phi = zeno_product(phi, alpha, d, m, cfg)?.into_matrix();
    let s_0 = zeno_product(0.0, alpha, d, m, cfg)?.into_matrix();
    let r_dag = rotation(phi, cfg).into_matrix().adjoint();
    let s0_dag = s_0.adjoint();
    let lhs = &r_dag * &s_phi * &s0_dag;
    let rhs = &s_0 * &r_dag * &s0_dag;
    let dfs = CatBasis::symmetric(d, alpha, cfg)?.matrix();
    let diff = (lhs - rhs) * dfs;
    Ok(diff.svd(false, false).singular_values.max())
}

/// `max_{ψ ∈ DFS(α)} ‖(R_φ† S_φ S_0† − U)ψ‖` with `U = Σ_μ e^{−iφμ}|μ⟩⟨μ|`
/// the ideal collision gate; this one carries the finite-M Zeno error.
pub fn zeno_gate_error(phi: f64, alpha: C64, d: usize, m: usize, cfg: &SpaceConfig) -> Result<f64> {
    let s_phi = zeno_product(phi, alpha, d, m, cfg)?.into_matrix();
    let s_0 = zeno_product(0.0, alpha, d, m, cfg)?.into_matrix();
    let r_dag = rotation(phi, cfg).into_matrix().adjoint();
    let dfs = CatBasis::symmetric(d, alpha, cfg)?.matrix();
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::from_polar(1.0, -phi * i as f64)
        } else {
            C64::from(0.0)
        }
    });
    let diff = r_dag * s_phi * s_0.adjoint() * &dfs - &dfs * phases;
    Ok(diff.svd(false, false).singular_values.max())
}
