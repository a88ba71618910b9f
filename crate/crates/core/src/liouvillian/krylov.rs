//! Arnoldi approximation of `exp(tA)v` with adaptive sub-stepping.

use nalgebra::DMatrix;

use crate::fockspace::{C64, ZERO};

pub(crate) struct KrylovWorkspace {
    basis: Vec<Vec<C64>>,
    max_dim: usize,
    tol: f64,
    pub(crate) matvecs: usize,
}

fn dotc(u: &[C64], w: &[C64]) -> C64 {
    u.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

impl KrylovWorkspace {
    pub(crate) fn new(len: usize, max_dim: usize, tol: f64) -> Self {
        Self {
            basis: (0..=max_dim).map(|_| vec![ZERO; len]).collect(),
            max_dim,
            tol,
            matvecs: 0,
        }
    }

    /// Overwrites `v` with `exp(t·A) v`, where `apply(x, y)` sets `y = A x`.
    pub(crate) fn expmv<F>(&mut self, mut apply: F, v: &mut [C64], t: f64)
    where
        F: FnMut(&[C64], &mut [C64]),
    {
        let m = self.max_dim;
        let mut t_done = 0.0;
        let mut tau = t;
        while t_done < t * (1.0 - 1e-14) {
            let beta = norm(v);
            if beta == 0.0 {
                return;
            }
            for (b, x) in self.basis[0].iter_mut().zip(v.iter()) {
                *b = x / beta;
            }
            let mut hess = DMatrix::<C64>::zeros(m + 1, m);
            let mut dim = m;
            let mut breakdown = false;
            for j in 0..m {
                let (head, tail) = self.basis.split_at_mut(j + 1);
                let w = &mut tail[0];
                apply(&head[j], w);
                self.matvecs += 1;
                // modified Gram-Schmidt, two passes
                for _ in 0..2 {
                    for (i, vi) in head.iter().enumerate() {
                        let h = dotc(vi, w);
                        hess[(i, j)] += h;
                        for (wk, vk) in w.iter_mut().zip(vi) {
                            *wk -= h * vk;
                        }
                    }
                }
                let hn = norm(w);
                hess[(j + 1, j)] = C64::from(hn);
                if hn <= 1e-13 * beta.max(1.0) {
                    dim = j + 1;
                    breakdown = true;
                    break;
                }
                for wk in w.iter_mut() {
                    *wk /= hn;
                }
            }
            let h_next = hess[(dim, dim - 1)].re;
            let remaining = t - t_done;
            tau = tau.min(remaining);
            loop {
                // augmented matrix [[τH, 0], [τh e_mᵀ, 0]] gives the
                // a-posteriori error term in its last row
                let size = if breakdown { dim } else { dim + 1 };
                let mut aug = DMatrix::<C64>::zeros(size, size);
                for j in 0..dim {
                    for i in 0..=(j + 1).min(dim - 1) {
                        aug[(i, j)] = hess[(i, j)] * tau;
                    }
                }
                if !breakdown {
                    aug[(dim, dim - 1)] = C64::from(h_next * tau);
                }
                let e = aug.exp();
                let err = if breakdown { 0.0 } else { beta * e[(dim, 0)].norm() };
                let target = self.tol * beta * (tau / t).max(1e-3);
                if err <= target || tau <= t * 1e-12 {
                    v.fill(ZERO);
                    for k in 0..dim {
                        let coef = e[(k, 0)] * beta;
                        for (vi, bi) in v.iter_mut().zip(&self.basis[k]) {
                            *vi += coef * bi;
                        }
                    }
                    t_done += tau;
                    let grow = if err > 0.0 {
                        (0.9 * (target / err).powf(1.0 / dim as f64)).clamp(1.0, 5.0)
                    } else {
                        5.0
                    };
                    tau *= grow;
                    break;
                }
                let shrink = (0.9 * (target / err).powf(1.0 / dim as f64)).clamp(0.1, 0.5);
                tau *= shrink;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_exponential() {
        let n = 40;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = i as f64 - j as f64;
            if i == j {
                C64::new(-(i as f64) * 3.0, 0.2)
            } else {
                C64::new((0.3 / (1.0 + d * d)).sin(), 0.1 * d / (1.0 + d * d))
            }
        });
        let v0: Vec<C64> = (0..n).map(|k| C64::new(1.0 / (1.0 + k as f64), 0.0)).collect();
        let t = 0.7;
        let exact = (&a * C64::from(t)).exp() * nalgebra::DVector::from_column_slice(&v0);
        let mut v = v0.clone();
        let mut ws = KrylovWorkspace::new(n, 12, 1e-11);
        ws.expmv(
            |x, y| {
                let r = &a * nalgebra::DVector::from_column_slice(x);
                y.copy_from_slice(r.as_slice());
            },
            &mut v,
            t,
        );
        let err: f64 = v
            .iter()
            .zip(exact.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "err = {err}");
    }
}
