//! Fixed-step integration of the time-dependent master equation.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::banded::LindbladGenerator;
use super::krylov::KrylovWorkspace;
use super::{DensityOperator, RootTrajectory};
use crate::error::{Error, Result};
use crate::fockspace::{Operator, SpaceConfig, C64, ZERO};
use crate::harness::io::fmt_num;

/// Trace drift (per step, before correction) treated as a failure.
const MAX_TRACE_DRIFT: f64 = 1e-4;
/// Purity excess `Tr ρ² − 1` signalling a loss of positivity.
const MAX_PURITY_EXCESS: f64 = 1e-5;
const KRYLOV_DIM: usize = 30;
/// Local error target of each Krylov exponential, relative to ‖ρ‖.
const KRYLOV_TOL: f64 = 1e-9;

/// Time-stepping scheme.
///
/// `Rk4` is the classical explicit method with the jump operator rebuilt at
/// each stage time; its step is limited by the largest decay rate of the
/// truncated generator, which grows like `n_trunc^d`. `Magnus4` is the
/// fourth-order commutator-free Magnus scheme with two Gauss-point
/// generators per step and Krylov exponentials, which removes the
/// stiffness limit. One of its two exponentials carries a negative weight,
/// so for fast root motion in a large truncation it can lose positivity;
/// that is detected and reported as [`Error::StepUnstable`]. `Midpoint` is
/// the second-order exponential midpoint rule `exp(hL(t+h/2))`, which is
/// completely positive step by step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Magnus4,
    Midpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub steps: usize,
    pub method: Integrator,
    /// Number of stored trajectory samples after t = 0.
    pub samples: usize,
}

impl Schedule {
    pub fn rk4(steps: usize) -> Self {
        Self {
            steps,
            method: Integrator::Rk4,
            samples: 1,
        }
    }

    pub fn magnus4(steps: usize) -> Self {
        Self {
            steps,
            method: Integrator::Magnus4,
            samples: 1,
        }
    }

    pub fn midpoint(steps: usize) -> Self {
        Self {
            steps,
            method: Integrator::Midpoint,
            samples: 1,
        }
    }

    /// Fixed step count for any method.
    pub fn with_method(method: Integrator, steps: usize) -> Self {
        Self {
            steps,
            method,
            samples: 1,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples.max(1);
        self
    }

    /// RK4 step count keeping `h·max_t ‖F(t)‖² ≤ 2.5` (inside the real-axis
    /// stability interval of RK4).
    pub fn auto_rk4(path: &dyn RootTrajectory, kappa: f64, cfg: &SpaceConfig) -> Self {
        let stiff = max_stiffness(path, kappa, cfg);
        let steps = (path.duration() * stiff / 2.5).ceil().max(1.0) as usize;
        Self::rk4(steps)
    }

    /// Step count for a target step size `h` (in units of 1/κ).
    pub fn by_step(method: Integrator, path: &dyn RootTrajectory, step: f64) -> Self {
        Self::with_method(method, (path.duration() / step).ceil().max(1.0) as usize)
    }

    pub fn step_size(&self, duration: f64) -> f64 {
        duration / self.steps as f64
    }

    pub fn halved(&self) -> Self {
        Self {
            steps: self.steps * 2,
            ..self.clone()
        }
    }
}

/// `max_t ‖F(t)‖²` over 65 sample times of the path.
pub(crate) fn max_stiffness(path: &dyn RootTrajectory, kappa: f64, cfg: &SpaceConfig) -> f64 {
    (0..=64)
        .map(|k| {
            let t = path.duration() * k as f64 / 64.0;
            super::banded::Banded::jump(kappa, &path.roots_at(t), cfg.n_trunc).spectral_norm_sqr()
        })
        .fold(0.0, f64::max)
}

/// Record of the per-step re-Hermitization and renormalization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrectionLog {
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    pub max_tail_weight: f64,
    pub corrections: usize,
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub rho: DensityOperator,
    /// Trace before renormalization.
    pub raw_trace: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub corrections: CorrectionLog,
    pub schedule: Schedule,
    pub generator_applications: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityOperator {
        &self.samples.last().expect("trajectory has samples").rho
    }

    /// CSV with columns `t,trace,purity,tail_weight` followed by the real
    /// and imaginary part of each named observable.
    pub fn write_csv(
        &self,
        path: impl AsRef<Path>,
        cfg: &SpaceConfig,
        observables: &[(&str, &Operator)],
    ) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("t,trace,purity,tail_weight");
        for (name, _) in observables {
            out.push_str(&format!(",re_{name},im_{name}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}",
                fmt_num(s.t),
                fmt_num(s.raw_trace),
                fmt_num(s.rho.purity()),
                fmt_num(s.rho.tail_weight(cfg))
            ));
            for (_, op) in observables {
                let v = s.rho.expectation(op);
                out.push_str(&format!(",{},{}", fmt_num(v.re), fmt_num(v.im)));
            }
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

const MAGNUS_C1: f64 = 0.5 - 0.288_675_134_594_812_9; // ½ − √3/6
const MAGNUS_C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const MAGNUS_BIG: f64 = 0.25 + 0.288_675_134_594_812_9; // ¼ + √3/6
const MAGNUS_SMALL: f64 = 0.25 - 0.288_675_134_594_812_9;

struct Stepper<'a> {
    path: &'a dyn RootTrajectory,
    kappa: f64,
    n: usize,
    method: Integrator,
    bufs: [Vec<C64>; 3],
    krylov: Option<KrylovWorkspace>,
    applications: usize,
}

impl<'a> Stepper<'a> {
    fn new(path: &'a dyn RootTrajectory, kappa: f64, n: usize, method: Integrator) -> Self {
        let len = n * n;
        Self {
            path,
            kappa,
            n,
            method,
            bufs: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
            krylov: match method {
                Integrator::Magnus4 | Integrator::Midpoint => Some(KrylovWorkspace::new(len, KRYLOV_DIM, KRYLOV_TOL)),
                Integrator::Rk4 => None,
            },
            applications: 0,
        }
    }

    fn generator(&self, t: f64) -> LindbladGenerator {
        LindbladGenerator::new(self.kappa, &self.path.roots_at(t), self.n)
    }

    fn step(&mut self, x: &mut [C64], t: f64, h: f64) {
        match self.method {
            Integrator::Rk4 => self.rk4_step(x, t, h),
            Integrator::Magnus4 => self.magnus_step(x, t, h),
            Integrator::Midpoint => self.midpoint_step(x, t, h),
        }
    }

    fn rk4_step(&mut self, x: &mut [C64], t: f64, h: f64) {
        let mut g0 = self.generator(t);
        let mut gm = self.generator(t + 0.5 * h);
        let mut g1 = self.generator(t + h);
        let [k, stage, acc] = &mut self.bufs;
        let one = C64::new(1.0, 0.0);
        // k1
        g0.apply(x, k);
        for i in 0..x.len() {
            acc[i] = k[i];
            stage[i] = x[i] + k[i] * (0.5 * h);
        }
        // k2
        gm.apply(stage, k);
        for i in 0..x.len() {
            acc[i] += k[i] * 2.0;
            stage[i] = x[i] + k[i] * (0.5 * h);
        }
        // k3
        gm.apply(stage, k);
        for i in 0..x.len() {
            acc[i] += k[i] * 2.0;
            stage[i] = x[i] + k[i] * h;
        }
        // k4
        g1.apply(stage, k);
        for i in 0..x.len() {
            acc[i] += k[i];
            x[i] += acc[i] * (h / 6.0) * one;
        }
        self.applications += 4;
    }

    fn magnus_step(&mut self, x: &mut [C64], t: f64, h: f64) {
        let mut g1 = self.generator(t + MAGNUS_C1 * h);
        let mut g2 = self.generator(t + MAGNUS_C2 * h);
        let ws = self.krylov.as_mut().expect("Magnus stepper owns a Krylov workspace");
        let before = ws.matvecs;
        for (w1, w2) in [(MAGNUS_BIG, MAGNUS_SMALL), (MAGNUS_SMALL, MAGNUS_BIG)] {
            ws.expmv(
                |v, out| {
                    out.fill(ZERO);
                    g1.apply_acc(v, out, C64::from(w1));
                    g2.apply_acc(v, out, C64::from(w2));
                },
                x,
                h,
            );
        }
        self.applications += 2 * (ws.matvecs - before);
    }

    fn midpoint_step(&mut self, x: &mut [C64], t: f64, h: f64) {
        let mut g = self.generator(t + 0.5 * h);
        let ws = self.krylov.as_mut().expect("midpoint stepper owns a Krylov workspace");
        let before = ws.matvecs;
        ws.expmv(|v, out| g.apply(v, out), x, h);
        self.applications += ws.matvecs - before;
    }
}

fn sample_steps(steps: usize, samples: usize) -> Vec<usize> {
    let samples = samples.clamp(1, steps.max(1));
    let mut marks: Vec<usize> = (1..=samples)
        .map(|k| ((k as f64 * steps as f64 / samples as f64).round() as usize).max(1))
        .collect();
    marks.dedup();
    marks
}

/// Integrates `ρ̇ = L(t)[ρ]` over `[0, path.duration()]`.
///
/// After every step the state is re-Hermitized and renormalized; the
/// size of each correction is logged; a trace drift above 1e-4 or a purity
/// above `1 + 1e-6` (lost positivity) aborts with [`Error::StepUnstable`].
/// Sampled states whose tail weight exceeds `cfg.tail_tol` abort with
/// [`Error::Truncation`].
pub fn evolve(
    rho0: &DensityOperator,
    kappa: f64,
    path: &dyn RootTrajectory,
    schedule: &Schedule,
    cfg: &SpaceConfig,
) -> Result<Trajectory> {
    let n = cfg.n_trunc;
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    if schedule.steps == 0 {
        return Err(Error::InvalidSpec("schedule needs at least one step".into()));
    }
    let duration = path.duration();
    let h = schedule.step_size(duration);
    let mut stepper = Stepper::new(path, kappa, n, schedule.method);
    let mut x = rho0.matrix().as_slice().to_vec();
    let mut log = CorrectionLog::default();
    let marks = sample_steps(schedule.steps, schedule.samples);
    let mut samples = vec![TrajectorySample {
        t: 0.0,
        rho: rho0.clone(),
        raw_trace: rho0.trace().re,
    }];
    let mut next_mark = 0;
    for step in 0..schedule.steps {
        let t = step as f64 * h;
        stepper.step(&mut x, t, h);
        let raw_trace = correct_state(&mut x, n, t + h, &mut log)?;
        if next_mark < marks.len() && marks[next_mark] == step + 1 {
            next_mark += 1;
            let rho = DensityOperator::from_matrix_unchecked(DMatrix::from_column_slice(n, n, &x));
            let tail = rho.tail_weight(cfg);
            log.max_tail_weight = log.max_tail_weight.max(tail);
            if tail > cfg.tail_tol {
                return Err(Error::Truncation(format!(
                    "tail weight {tail:.3e} > {:.1e} at t = {:.4}",
                    cfg.tail_tol,
                    t + h
                )));
            }
            samples.push(TrajectorySample {
                t: t + h,
                rho,
                raw_trace,
            });
        }
    }
    if log.max_trace_drift > 0.0 || log.max_hermiticity_residual > 0.0 {
        log::debug!(
            "evolve: {} corrections, max trace drift {:.3e}, max Hermiticity residual {:.3e}",
            log.corrections,
            log.max_trace_drift,
            log.max_hermiticity_residual
        );
    }
    Ok(Trajectory {
        samples,
        corrections: log,
        schedule: schedule.clone(),
        generator_applications: stepper.applications,
    })
}

/// Re-Hermitizes and renormalizes in place; returns the trace before
/// correction.
fn correct_state(x: &mut [C64], n: usize, t: f64, log: &mut CorrectionLog) -> Result<f64> {
    let mut trace = ZERO;
    for k in 0..n {
        trace += x[k * n + k];
    }
    let drift = (trace - C64::new(1.0, 0.0)).norm();
    if !(drift <= MAX_TRACE_DRIFT) {
        return Err(Error::StepUnstable { time: t, drift });
    }
    let mut herm = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let (a, b) = (x[j * n + i], x[i * n + j]);
            herm = herm.max((a - b.conj()).norm());
            let avg = (a + b.conj()) * 0.5;
            x[j * n + i] = avg;
            x[i * n + j] = avg.conj();
        }
    }
    let tr = trace.re;
    for v in x.iter_mut() {
        *v /= tr;
    }
    let purity: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if !(purity <= 1.0 + MAX_PURITY_EXCESS) {
        return Err(Error::StepUnstable {
            time: t,
            drift: purity - 1.0,
        });
    }
    log.max_trace_drift = log.max_trace_drift.max(drift);
    log.max_hermiticity_residual = log.max_hermiticity_residual.max(herm);
    log.corrections += 1;
    Ok(tr)
}

/// Linear propagation of an arbitrary (possibly non-Hermitian) operator
/// without any correction. Used for process tomography of gates.
pub fn propagate_operator(
    x0: &DMatrix<C64>,
    kappa: f64,
    path: &dyn RootTrajectory,
    schedule: &Schedule,
) -> Result<DMatrix<C64>> {
    let n = x0.nrows();
    if schedule.steps == 0 {
        return Err(Error::InvalidSpec("schedule needs at least one step".into()));
    }
    let h = schedule.step_size(path.duration());
    let mut stepper = Stepper::new(path, kappa, n, schedule.method);
    let mut x = x0.as_slice().to_vec();
    for step in 0..schedule.steps {
        stepper.step(&mut x, step as f64 * h, h);
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::StepUnstable {
            time: path.duration(),
            drift: f64::INFINITY,
        });
    }
    Ok(DMatrix::from_column_slice(n, n, &x))
}
