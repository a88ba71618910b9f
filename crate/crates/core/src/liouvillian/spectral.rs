//! Spectrum, steady space, dissipation gap and conserved quantities of a
//! dense Liouvillian.

use std::path::Path;

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use super::Superoperator;
use crate::error::{Error, Result};
use crate::fockspace::{Operator, StateVector, C64, ZERO};
use crate::harness::io::fmt_num;

/// Null-cluster tolerance relative to κ.
pub const NULL_TOL: f64 = 1e-7;

fn to_faer(m: &DMatrix<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues sorted by decreasing real part.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
}

impl Spectrum {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("re,im\n");
        for l in &self.eigenvalues {
            out.push_str(&format!("{},{}\n", fmt_num(l.re), fmt_num(l.im)));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Splits at `tol·κ`: returns (null count, smallest |λ| outside).
    fn null_split(&self, kappa: f64, tol: f64) -> (usize, f64) {
        let mut count = 0;
        let mut next = f64::INFINITY;
        for l in &self.eigenvalues {
            if l.norm() < tol * kappa {
                count += 1;
            } else {
                next = next.min(l.norm());
            }
        }
        (count, next)
    }
}

pub fn spectrum(l: &Superoperator) -> Result<Spectrum> {
    let mut eigenvalues = to_faer(l.matrix())
        .eigenvalues()
        .map_err(|e| Error::IllConditioned(format!("eigensolver failed: {e:?}")))?;
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(Spectrum { eigenvalues })
}

/// Right null space of L.
#[derive(Debug, Clone)]
pub struct SteadySpace {
    pub dim: usize,
    /// Orthonormal (Hilbert–Schmidt) basis of the null space.
    pub basis: Vec<DMatrix<C64>>,
    /// Smallest |λ| outside the null cluster, in units of κ.
    pub next_rate: f64,
}

fn check_separation(count: usize, next: f64, kappa: f64, tol: f64) -> Result<()> {
    if count == 0 {
        return Err(Error::IllConditioned(format!(
            "no eigenvalue below {:.1e}·κ",
            tol
        )));
    }
    if next < 10.0 * tol * kappa {
        return Err(Error::IllConditioned(format!(
            "null cluster and next eigenvalue |λ| = {next:.3e} are not separated by 10×tol·κ"
        )));
    }
    Ok(())
}

pub fn steady_space(l: &Superoperator, kappa: f64, tol: f64) -> Result<SteadySpace> {
    let spec = spectrum(l)?;
    let (dim, next) = spec.null_split(kappa, tol);
    check_separation(dim, next, kappa, tol)?;
    let n = l.space_dim();
    let svd = to_faer(l.matrix())
        .svd()
        .map_err(|e| Error::IllConditioned(format!("SVD failed: {e:?}")))?;
    let v = svd.V();
    let cols = v.ncols();
    let basis = (cols - dim..cols)
        .map(|c| DMatrix::from_fn(n, n, |i, j| v[(j * n + i, c)]))
        .collect();
    Ok(SteadySpace {
        dim,
        basis,
        next_rate: next / kappa,
    })
}

/// `−max{Re λ : λ outside the null cluster}` in units of κ.
pub fn dissipation_gap(l: &Superoperator, kappa: f64, tol: f64) -> Result<f64> {
    gap_of(&spectrum(l)?, kappa, tol, None)
}

/// As [`dissipation_gap`], but a null cluster of any size other than
/// `null_dim` is `IllConditioned` (a truncation-split cluster otherwise
/// reports a spurious tiny gap).
pub fn dissipation_gap_with_null_dim(l: &Superoperator, kappa: f64, tol: f64, null_dim: usize) -> Result<f64> {
    gap_of(&spectrum(l)?, kappa, tol, Some(null_dim))
}

fn gap_of(spec: &Spectrum, kappa: f64, tol: f64, null_dim: Option<usize>) -> Result<f64> {
    let (count, next) = spec.null_split(kappa, tol);
    check_separation(count, next, kappa, tol)?;
    if let Some(k) = null_dim.filter(|&k| k != count) {
        return Err(Error::IllConditioned(format!(
            "null cluster has {count} eigenvalues below {tol:.1e}·κ, expected {k}"
        )));
    }
    let top = spec
        .eigenvalues
        .iter()
        .filter(|l| l.norm() >= tol * kappa)
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(-top / kappa)
}

/// Conserved operator `J` dual to `|μ⟩⟨μ′|` in a given steady basis.
#[derive(Debug, Clone)]
pub struct ConservedQuantity {
    pub mu: usize,
    pub mu_prime: usize,
    pub matrix: Operator,
    /// ‖L†[J]‖ / ‖J‖
    pub adjoint_residual: f64,
}

impl ConservedQuantity {
    /// Tr[J† ρ]
    pub fn pairing(&self, rho: &DMatrix<C64>) -> C64 {
        self.matrix
            .matrix()
            .iter()
            .zip(rho.iter())
            .map(|(j, r)| j.conj() * r)
            .sum()
    }
}

/// Left null space of L, dual-normalized so that
/// `Tr[J†_{μμ′} |σ⟩⟨σ′|] = δ_{μσ} δ_{μ′σ′}` for the given basis states.
/// Output order is `μ·d + μ′`.
pub fn conserved_quantities(
    l: &Superoperator,
    basis: &[StateVector],
    kappa: f64,
    tol: f64,
) -> Result<Vec<ConservedQuantity>> {
    let d = basis.len();
    let k = d * d;
    let n = l.space_dim();
    if k == 0 || basis.iter().any(|s| s.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: basis.first().map_or(0, |s| s.dim()),
        });
    }
    let svd = to_faer(l.matrix())
        .svd()
        .map_err(|e| Error::IllConditioned(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let cols = s.nrows();
    if cols < k {
        return Err(Error::IllConditioned("fewer singular values than d²".into()));
    }
    let next = if cols > k { s[cols - k - 1].re } else { f64::INFINITY };
    let worst_null = s[cols - k].re;
    if worst_null >= tol * kappa || next < 10.0 * tol * kappa {
        return Err(Error::IllConditioned(format!(
            "left null space of dimension {k} not resolved: σ = {worst_null:.3e}, next {next:.3e}"
        )));
    }
    let u = svd.U();
    let left: Vec<DVector<C64>> = (cols - k..cols)
        .map(|c| DVector::from_fn(n * n, |r, _| u[(r, c)]))
        .collect();
    let targets: Vec<DVector<C64>> = (0..k)
        .map(|m| {
            let outer = basis[m / d].outer(&basis[m % d]);
            DVector::from_column_slice(outer.as_slice())
        })
        .collect();
    let pairing = DMatrix::from_fn(k, k, |a, b| left[a].dotc(&targets[b]));
    let pair_svd = pairing.clone().svd(false, false);
    let smin = pair_svd.singular_values.min();
    if smin < 1e-8 * pair_svd.singular_values.max() {
        return Err(Error::IllConditioned(format!(
            "dual pairing matrix singular (σ_min = {smin:.3e})"
        )));
    }
    let inv = pairing
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("dual pairing matrix not invertible".into()))?;
    let coef = inv.adjoint();
    let mut out = Vec::with_capacity(k);
    for m in 0..k {
        let mut v = DVector::<C64>::zeros(n * n);
        for (c, lv) in left.iter().enumerate() {
            v += lv * coef[(c, m)];
        }
        let adj = l.matrix().adjoint() * &v;
        let residual = adj.norm() / v.norm();
        out.push(ConservedQuantity {
            mu: m / d,
            mu_prime: m % d,
            matrix: Operator::new(DMatrix::from_column_slice(n, n, v.as_slice())),
            adjoint_residual: residual,
        });
    }
    let _ = ZERO;
    Ok(out)
}
