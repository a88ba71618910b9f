//! Coherent-state projectors, the discrete position operator and the
//! nested commutators that span su(d).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::catcode::{CatBasis, WELL_SEPARATED};
use crate::error::{Error, Result};
use crate::fockspace::{coherent_state, SpaceConfig, C64};

/// Relative eigenvalue cutoff of the Gram matrix.
const RANK_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;

/// Generator elements as d×d matrices in the orthonormal cat basis.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub d: usize,
    pub alpha: f64,
    /// `|αe_ν⟩` in cat coordinates.
    pub coherent: Vec<DVector<C64>>,
    /// `π̂_ν = |αe_ν⟩⟨αe_ν|`
    pub projectors: Vec<DMatrix<C64>>,
    /// `χ̂ = Σ_μ μ|μ_α⟩⟨μ_α|`
    pub position: DMatrix<C64>,
    /// `(ν, ν′, ĝ_{νν′})` for ν ≠ ν′
    pub g: Vec<(usize, usize, DMatrix<C64>)>,
    /// `(ν, ν′, (i/2)[π̂_ν − π̂_{ν′}, ĝ_{νν′}])`
    pub h: Vec<(usize, usize, DMatrix<C64>)>,
}

fn comm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

fn hermiticity(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl GeneratorSet {
    /// Every stored element, projectors first.
    pub fn elements(&self) -> Vec<&DMatrix<C64>> {
        self.projectors
            .iter()
            .chain(self.g.iter().map(|(_, _, m)| m))
            .chain(self.h.iter().map(|(_, _, m)| m))
            .collect()
    }

    pub fn max_hermiticity_residual(&self) -> f64 {
        self.elements()
            .into_iter()
            .chain(std::iter::once(&self.position))
            .map(hermiticity)
            .fold(0.0, f64::max)
    }

    /// `ĝ_{νν′}` if it was built.
    pub fn g_element(&self, nu: usize, nu_p: usize) -> Option<&DMatrix<C64>> {
        self.g.iter().find(|(a, b, _)| *a == nu && *b == nu_p).map(|(_, _, m)| m)
    }

    /// `|αe_ν⟩⟨αe_{ν′}| / (e^{−i2π(ν−ν′)/d} − 1) + H.c.` in the same basis,
    /// the orthogonal-coherent-state value of `ĝ_{νν′}`.
    pub fn g_closed_form(&self, nu: usize, nu_p: usize) -> DMatrix<C64> {
        let theta = -2.0 * PI * (nu as f64 - nu_p as f64) / self.d as f64;
        let denom = C64::from_polar(1.0, theta) - C64::from(1.0);
        let m = &self.coherent[nu] * self.coherent[nu_p].adjoint() / denom;
        &m + m.adjoint()
    }
}

/// Builds the generator set for the symmetric configuration `α·e_ν`.
pub fn su_d_generators(d: usize, alpha: f64, cfg: &SpaceConfig) -> Result<GeneratorSet> {
    if d < 2 {
        return Err(Error::InvalidSpec(format!("su(d) needs d ≥ 2, got {d}")));
    }
    let metric = crate::catcode::regime_metric(C64::from(alpha), d);
    if metric < WELL_SEPARATED {
        return Err(Error::SeparationViolation {
            distance: metric,
            threshold: WELL_SEPARATED,
        });
    }
    let basis = CatBasis::symmetric(d, C64::from(alpha), cfg)?;
    let b = basis.matrix();
    let mut coherent = Vec::with_capacity(d);
    for nu in 0..d {
        let root = C64::from_polar(alpha, 2.0 * PI * nu as f64 / d as f64);
        coherent.push(b.adjoint() * coherent_state(root, cfg)?.amplitudes());
    }
    let projectors: Vec<DMatrix<C64>> = coherent.iter().map(|v| v * v.adjoint()).collect();
    let position = DMatrix::from_fn(d, d, |i, j| if i == j { C64::from(i as f64) } else { C64::from(0.0) });
    let mut g = Vec::new();
    let mut h = Vec::new();
    for nu in 0..d {
        for nu_p in 0..d {
            if nu == nu_p {
                continue;
            }
            let gm = comm(&projectors[nu], &comm(&position, &projectors[nu_p]));
            let hm = comm(&(&projectors[nu] - &projectors[nu_p]), &gm) * C64::new(0.0, 0.5);
            g.push((nu, nu_p, gm));
            h.push((nu, nu_p, hm));
        }
    }
    let set = GeneratorSet {
        d,
        alpha,
        coherent,
        projectors,
        position,
        g,
        h,
    };
    let herm = set.max_hermiticity_residual();
    if herm > HERMITIAN_TOL {
        return Err(Error::IllConditioned(format!(
            "generator elements not Hermitian (residual {herm:.3e})"
        )));
    }
    Ok(set)
}

/// Rank of the Hilbert–Schmidt Gram matrix of the traceless parts of all
/// elements, with eigenvalues below `1e−8·λ_max` treated as zero.
pub fn rank_check(gens: &GeneratorSet) -> usize {
    let d = gens.d;
    let id = DMatrix::<C64>::identity(d, d);
    let traceless: Vec<DMatrix<C64>> = gens
        .elements()
        .into_iter()
        .map(|m| m - &id * (m.trace() / C64::from(d as f64)))
        .collect();
    let k = traceless.len();
    let gram = DMatrix::from_fn(k, k, |a, b| (traceless[a].adjoint() * &traceless[b]).trace());
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    eig.eigenvalues.iter().filter(|&&l| l > RANK_TOL * top).count()
}
