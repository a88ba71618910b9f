use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::{ladder_operators, SpaceConfig, C64};
use crate::error::{Error, Result};
use crate::harness::io::fmt_num;
use crate::liouvillian::DensityOperator;

/// Rectangular lattice of phase-space points `β = x + ip`, with
/// `X = ½⟨a + a†⟩` and `P = −(i/2)⟨a − a†⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
}

impl PhaseGrid {
    pub fn uniform(x_range: (f64, f64), nx: usize, p_range: (f64, f64), np: usize) -> Self {
        let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
            if n <= 1 {
                return vec![lo];
            }
            (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect()
        };
        Self {
            xs: axis(x_range, nx),
            ps: axis(p_range, np),
        }
    }

    /// Square grid `[-r, r]²` with `n` points per axis.
    pub fn square(radius: f64, n: usize) -> Self {
        Self::uniform((-radius, radius), n, (-radius, radius), n)
    }

    pub fn max_radius(&self) -> f64 {
        let mut r = 0.0f64;
        for &x in &self.xs {
            for &p in &self.ps {
                r = r.max(x.hypot(p));
            }
        }
        r
    }
}

/// Wigner values on a [`PhaseGrid`], stored row-major with `p` as the
/// slow index.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub max_imag_residue: f64,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.xs.len() + ix]
    }

    /// Riemann sum of W over the lattice.
    pub fn integral(&self) -> f64 {
        let dx = spacing(&self.grid.xs);
        let dp = spacing(&self.grid.ps);
        self.values.iter().sum::<f64>() * dx * dp
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("x,p,w\n");
        for (ip, &p) in self.grid.ps.iter().enumerate() {
            for (ix, &x) in self.grid.xs.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_num(x),
                    fmt_num(p),
                    fmt_num(self.at(ix, ip))
                ));
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Binary 8-bit PGM; top row is the largest `p`. The comment line
    /// records the affine map from gray level back to W.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (min, max) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = if max > min { max - min } else { 1.0 };
        let (nx, np) = (self.grid.xs.len(), self.grid.ps.len());
        let mut bytes = format!(
            "P5\n# wigner min={} max={} (gray = 255*(w-min)/(max-min))\n{nx} {np}\n255\n",
            fmt_num(min),
            fmt_num(max)
        )
        .into_bytes();
        for ip in (0..np).rev() {
            for ix in 0..nx {
                let level = (255.0 * (self.at(ix, ip) - min) / span).round();
                bytes.push(level.clamp(0.0, 255.0) as u8);
            }
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&bytes).map_err(|e| Error::io(path, e))
    }
}

fn spacing(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

/// `W(β) = (2/π) Tr[ρ D_β Π D_β†]` with `Π = exp(iπn̂)`.
pub fn wigner(rho: &DensityOperator, grid: &PhaseGrid, cfg: &SpaceConfig) -> Result<WignerGrid> {
    let n = cfg.n_trunc;
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.dim(),
        });
    }
    let reliable = (n as f64).sqrt() / 2.0;
    let r = grid.max_radius();
    if r > reliable + 1e-12 {
        return Err(Error::Truncation(format!(
            "Wigner grid radius {r:.3} exceeds reliable radius √n/2 = {reliable:.3}"
        )));
    }
    let ladder = ladder_operators(cfg);
    let (a, a_dag) = (ladder.a.matrix(), ladder.a_dag.matrix());
    let rho = rho.matrix();
    let mut values = Vec::with_capacity(grid.xs.len() * grid.ps.len());
    let mut max_imag = 0.0f64;
    for &p in &grid.ps {
        for &x in &grid.xs {
            let beta = C64::new(x, p);
            let d: DMatrix<C64> = (a_dag * beta - a * beta.conj()).exp();
            let rd = rho * &d;
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..n {
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                let diag: C64 = d.column(col).dotc(&rd.column(col));
                acc += diag * sign;
            }
            let w = acc * (2.0 / PI);
            max_imag = max_imag.max(w.im.abs());
            values.push(w.re);
        }
    }
    Ok(WignerGrid {
        grid: grid.clone(),
        values,
        max_imag_residue: max_imag,
    })
}
