//! Banded representation of polynomial jump operators and the Lindblad
//! generator action on dense column-major matrices.

use nalgebra::DMatrix;

use crate::fockspace::{C64, ZERO};

/// Banded square matrix. `diags[lower + k][i]` holds `M[i, i+k]`;
/// positions outside the matrix hold zero.
#[derive(Debug, Clone)]
pub(crate) struct Banded {
    n: usize,
    lower: usize,
    upper: usize,
    diags: Vec<Vec<C64>>,
}

/// Coefficients of `∏_ν (x − α_ν)`, lowest degree first.
pub(crate) fn root_polynomial(roots: &[C64]) -> Vec<C64> {
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![ZERO; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

impl Banded {
    fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            diags: vec![vec![ZERO; n]; lower + upper + 1],
        }
    }

    /// `√κ ∏_ν (a − α_ν)` on `n` Fock levels.
    pub(crate) fn jump(kappa: f64, roots: &[C64], n: usize) -> Self {
        let coeffs = root_polynomial(roots);
        let d = roots.len();
        let mut m = Self::zeros(n, 0, d.min(n - 1));
        let sk = kappa.sqrt();
        for (k, &c) in coeffs.iter().enumerate() {
            if k >= n {
                break;
            }
            let diag = &mut m.diags[k];
            for i in 0..n - k {
                // (a^k)[i, i+k] = √((i+k)!/i!)
                let falling: f64 = ((i + 1)..=(i + k)).map(|q| q as f64).product();
                diag[i] = c * (sk * falling.sqrt());
            }
        }
        m
    }

    fn offsets(&self) -> impl Iterator<Item = isize> {
        -(self.lower as isize)..=(self.upper as isize)
    }

    fn diag(&self, k: isize) -> &[C64] {
        &self.diags[(k + self.lower as isize) as usize]
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> C64 {
        let k = j as isize - i as isize;
        if k < -(self.lower as isize) || k > self.upper as isize {
            ZERO
        } else {
            self.diag(k)[i]
        }
    }

    pub(crate) fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `M† M`
    pub(crate) fn gram(&self) -> Banded {
        let width = self.lower + self.upper;
        let mut g = Banded::zeros(self.n, width, width);
        let n = self.n as isize;
        for m in 0..n {
            for k1 in self.offsets() {
                let c1 = m + k1;
                if c1 < 0 || c1 >= n {
                    continue;
                }
                let a = self.diag(k1)[m as usize].conj();
                for k2 in self.offsets() {
                    let c2 = m + k2;
                    if c2 < 0 || c2 >= n {
                        continue;
                    }
                    let b = self.diag(k2)[m as usize];
                    let off = (k2 - k1 + width as isize) as usize;
                    g.diags[off][c1 as usize] += a * b;
                }
            }
        }
        g
    }

    /// Largest eigenvalue of `M†M` by power iteration (an upper estimate
    /// of the generator's stiffness).
    pub(crate) fn spectral_norm_sqr(&self) -> f64 {
        let g = self.gram();
        let n = self.n;
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + i as f64 / n as f64, 0.0)).collect();
        let mut w = vec![ZERO; n];
        let mut lambda = 0.0;
        for _ in 0..200 {
            g.left_mul_col(&v, &mut w);
            let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
            if (next - lambda).abs() <= 1e-6 * next {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda
    }

    /// `y = M x` for one column.
    fn left_mul_col(&self, x: &[C64], y: &mut [C64]) {
        y.fill(ZERO);
        self.left_mul_col_acc(x, y, C64::new(1.0, 0.0));
    }

    /// `y += s·M x` for one column.
    fn left_mul_col_acc(&self, x: &[C64], y: &mut [C64], s: C64) {
        let n = self.n as isize;
        for k in self.offsets() {
            let d = self.diag(k);
            let lo = (-k).max(0);
            let hi = (n - k).min(n);
            for i in lo..hi {
                let i = i as usize;
                y[i] += s * d[i] * x[(i as isize + k) as usize];
            }
        }
    }

    /// `out += s·M X` on an n×n column-major matrix.
    pub(crate) fn left_mul_acc(&self, x: &[C64], out: &mut [C64], s: C64) {
        let n = self.n;
        for j in 0..n {
            let col = j * n..(j + 1) * n;
            self.left_mul_col_acc(&x[col.clone()], &mut out[col], s);
        }
    }

    /// `out += s·X M`.
    pub(crate) fn right_mul_acc(&self, x: &[C64], out: &mut [C64], s: C64) {
        let n = self.n;
        for j in 0..n {
            for k in self.offsets() {
                let l = j as isize - k;
                if l < 0 || l >= n as isize {
                    continue;
                }
                let l = l as usize;
                let coef = s * self.diag(k)[l];
                if coef == ZERO {
                    continue;
                }
                let (src, dst) = (l * n, j * n);
                for i in 0..n {
                    out[dst + i] += coef * x[src + i];
                }
            }
        }
    }

    /// `out += s·X M†`.
    pub(crate) fn right_mul_adjoint_acc(&self, x: &[C64], out: &mut [C64], s: C64) {
        let n = self.n;
        for j in 0..n {
            for k in self.offsets() {
                // (M†)[l, j] = conj(M[j, l]) with l = j + k
                let l = j as isize + k;
                if l < 0 || l >= n as isize {
                    continue;
                }
                let l = l as usize;
                let coef = s * self.diag(k)[j].conj();
                if coef == ZERO {
                    continue;
                }
                let (src, dst) = (l * n, j * n);
                for i in 0..n {
                    out[dst + i] += coef * x[src + i];
                }
            }
        }
    }

    /// `out += s·M† X`.
    #[cfg(test)]
    pub(crate) fn adjoint_left_mul_acc(&self, x: &[C64], out: &mut [C64], s: C64) {
        let n = self.n as isize;
        for j in 0..self.n {
            let base = j * self.n;
            for k in self.offsets() {
                // (M†)[i, i−k] = conj(M[i−k, i])
                let d = self.diag(k);
                for r in (-k).max(0)..(n - k).min(n) {
                    let i = (r + k) as usize;
                    let r = r as usize;
                    out[base + i] += s * d[r].conj() * x[base + r];
                }
            }
        }
    }
}

/// Lindblad generator `L[X] = F X F† − ½{F†F, X}` for one jump operator.
#[derive(Debug, Clone)]
pub(crate) struct LindbladGenerator {
    f: Banded,
    g: Banded,
    scratch: Vec<C64>,
}

impl LindbladGenerator {
    pub(crate) fn new(kappa: f64, roots: &[C64], n: usize) -> Self {
        let f = Banded::jump(kappa, roots, n);
        let g = f.gram();
        Self {
            f,
            g,
            scratch: vec![ZERO; n * n],
        }
    }

    /// `out += s·L[X]`
    pub(crate) fn apply_acc(&mut self, x: &[C64], out: &mut [C64], s: C64) {
        self.scratch.fill(ZERO);
        self.f.left_mul_acc(x, &mut self.scratch, C64::new(1.0, 0.0));
        self.f.right_mul_adjoint_acc(&self.scratch, out, s);
        let half = s * -0.5;
        self.g.left_mul_acc(x, out, half);
        self.g.right_mul_acc(x, out, half);
    }

    pub(crate) fn apply(&mut self, x: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        self.apply_acc(x, out, C64::new(1.0, 0.0));
    }

    /// `out = L†[X] = F† X F − ½{F†F, X}`
    #[cfg(test)]
    pub(crate) fn apply_adjoint(&mut self, x: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        self.scratch.fill(ZERO);
        self.f.adjoint_left_mul_acc(x, &mut self.scratch, C64::new(1.0, 0.0));
        self.f.right_mul_acc(&self.scratch, out, C64::new(1.0, 0.0));
        let half = C64::new(-0.5, 0.0);
        self.g.left_mul_acc(x, out, half);
        self.g.right_mul_acc(x, out, half);
    }
}
