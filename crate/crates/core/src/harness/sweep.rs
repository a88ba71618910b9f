//! Impurity-scaling sweeps over (κT, α) and dissipation-gap sweeps.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{power_law_fit, FitResult};
use super::io::fmt_num;
use super::runner::{GateKind, GateTemplate, IntegrationSettings};
use crate::error::{Error, Result};
use crate::fockspace::{SpaceConfig, C64};
use crate::liouvillian::{build_jump, dissipation_gap_with_null_dim, liouvillian_matrix, JumpSpec, NULL_TOL};

/// Which (κT, α) pairs are run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridShape {
    /// Every combination.
    #[default]
    Full,
    /// The κT ladder at the first α, plus the α ladder at the largest κT.
    Cross,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub template: GateTemplate,
    pub alphas: Vec<f64>,
    pub kappa_ts: Vec<f64>,
    #[serde(default)]
    pub shape: GridShape,
    #[serde(default)]
    pub settings: IntegrationSettings,
    /// Fixed truncation for every point; otherwise chosen per point.
    #[serde(default)]
    pub n_trunc: Option<usize>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    /// Also diagonalize the static Liouvillian of each point.
    #[serde(default)]
    pub compute_gap: bool,
}

fn default_tail_tol() -> f64 {
    SpaceConfig::DEFAULT_TAIL_TOL
}

impl SweepSpec {
    /// α used for the κT fit.
    pub fn fit_alpha(&self) -> f64 {
        self.alphas.first().copied().unwrap_or(f64::NAN)
    }

    /// κT used for the α fit.
    pub fn fit_kappa_t(&self) -> f64 {
        self.kappa_ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = match self.shape {
            GridShape::Full => self
                .alphas
                .iter()
                .flat_map(|&a| self.kappa_ts.iter().map(move |&t| (a, t)))
                .collect(),
            GridShape::Cross => {
                let a0 = self.fit_alpha();
                let t0 = self.fit_kappa_t();
                let mut v: Vec<(f64, f64)> = self.kappa_ts.iter().map(|&t| (a0, t)).collect();
                v.extend(self.alphas.iter().map(|&a| (a, t0)));
                v
            }
        };
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup();
        pts
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.kappa_ts.is_empty() {
            return Err(Error::InvalidSpec("sweep needs at least one α and one κT".into()));
        }
        let lo = self.kappa_ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.fit_kappa_t();
        if self.kappa_ts.len() > 1 && hi < 10.0 * lo * (1.0 - 1e-12) {
            log::warn!("κT values span less than a decade ({lo} to {hi})");
        }
        Ok(())
    }
}

/// One grid point. Numerical failures are recorded in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub kind: GateKind,
    pub d: usize,
    pub alpha: f64,
    #[serde(rename = "kappa_T")]
    pub kappa_t: f64,
    pub n_trunc: usize,
    pub steps: usize,
    pub epsilon: f64,
    pub dfs_fidelity: f64,
    pub leakage: f64,
    pub phase: f64,
    pub gap_over_kappa: f64,
    pub error: String,
    pub wall_time: f64,
}

type Key = (GateKind, usize, String, String);

impl SweepRecord {
    fn key(&self) -> Key {
        (self.kind, self.d, fmt_num(self.alpha), fmt_num(self.kappa_t))
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_empty()
    }

    fn failed(template: &GateTemplate, alpha: f64, kappa_t: f64, err: &Error, wall_time: f64) -> Self {
        Self {
            kind: template.kind,
            d: template.d,
            alpha,
            kappa_t,
            n_trunc: 0,
            steps: 0,
            epsilon: f64::NAN,
            dfs_fidelity: f64::NAN,
            leakage: f64::NAN,
            phase: f64::NAN,
            gap_over_kappa: f64::NAN,
            error: err.to_string().replace([',', '\n'], ";"),
            wall_time,
        }
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.kind.as_str().to_string(),
            self.d.to_string(),
            fmt_num(self.alpha),
            fmt_num(self.kappa_t),
            self.n_trunc.to_string(),
            self.steps.to_string(),
            fmt_num(self.epsilon),
            fmt_num(self.dfs_fidelity),
            fmt_num(self.leakage),
            fmt_num(self.phase),
            fmt_num(self.gap_over_kappa),
            self.error.clone(),
            format!("{:.3}", self.wall_time),
        ]
    }
}

const HEADER: [&str; 13] = [
    "kind",
    "d",
    "alpha",
    "kappa_T",
    "n_trunc",
    "steps",
    "epsilon",
    "dfs_fidelity",
    "leakage",
    "phase",
    "gap_over_kappa",
    "error",
    "wall_time",
];

/// Gap of the static Liouvillian at the start of the gate.
fn static_gap(template: &GateTemplate, alpha: f64, space: &SpaceConfig) -> Result<f64> {
    let roots = crate::liouvillian::symmetric_roots(template.d, C64::from(alpha));
    let f = build_jump(&JumpSpec::new(template.kappa, roots)?, space)?;
    dissipation_gap_with_null_dim(&liouvillian_matrix(&f), template.kappa, NULL_TOL, template.d * template.d)
}

/// Runs a single grid point; never fails.
pub fn run_point(spec: &SweepSpec, alpha: f64, kappa_t: f64) -> SweepRecord {
    let start = std::time::Instant::now();
    let space = match spec.n_trunc {
        Some(n) => match SpaceConfig::new(n, spec.tail_tol) {
            Ok(s) => Some(s),
            Err(e) => return SweepRecord::failed(&spec.template, alpha, kappa_t, &e, 0.0),
        },
        None => None,
    };
    let attempt = || -> Result<SweepRecord> {
        let prepared = spec.template.prepare(alpha, kappa_t, space, spec.tail_tol)?;
        let report = prepared.run(&spec.settings)?;
        let gap = if spec.compute_gap {
            static_gap(&spec.template, alpha, &prepared.space)?
        } else {
            f64::NAN
        };
        Ok(SweepRecord {
            kind: spec.template.kind,
            d: spec.template.d,
            alpha,
            kappa_t,
            n_trunc: report.n_trunc,
            steps: report.steps,
            epsilon: report.outcome.impurity,
            dfs_fidelity: report.fidelity,
            leakage: report.outcome.leakage,
            phase: report.phase.clone().unwrap_or(f64::NAN),
            gap_over_kappa: gap,
            error: String::new(),
            wall_time: start.elapsed().as_secs_f64(),
        })
    };
    attempt().unwrap_or_else(|e| {
        log::warn!("sweep point α = {alpha}, κT = {kappa_t} failed: {e}");
        SweepRecord::failed(&spec.template, alpha, kappa_t, &e, start.elapsed().as_secs_f64())
    })
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Sorted by (α, κT).
    pub records: Vec<SweepRecord>,
    /// `log ε` against `log κT` at the fit α.
    pub t_fit: Option<FitResult>,
    /// `log ε` against `log α` at the largest κT; `p = −slope`.
    pub alpha_fit: Option<FitResult>,
    /// Points taken from an existing CSV instead of being recomputed.
    pub resumed: usize,
}

fn read_existing(path: &Path) -> Result<Vec<SweepRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        match rec {
            Ok(r) => out.push(r),
            // a row cut short by an interruption is simply recomputed
            Err(e) => log::warn!("skipping unreadable row in {}: {e}", path.display()),
        }
    }
    Ok(out)
}

fn write_all(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    w.write_record(HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.row()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs every grid point not already present in `csv_path`, appending rows
/// as they finish, then rewrites the file sorted by (α, κT).
pub fn scaling_sweep(spec: &SweepSpec, threads: usize, csv_path: Option<&Path>) -> Result<SweepResult> {
    spec.validate()?;
    let mut done: BTreeMap<Key, SweepRecord> = BTreeMap::new();
    if let Some(p) = csv_path {
        for r in read_existing(p)? {
            done.insert(r.key(), r);
        }
    }
    let wanted: Vec<(f64, f64)> = spec.points();
    let key_of = |a: f64, t: f64| (spec.template.kind, spec.template.d, fmt_num(a), fmt_num(t));
    let todo: Vec<(f64, f64)> = wanted.iter().copied().filter(|&(a, t)| !done.contains_key(&key_of(a, t))).collect();
    let resumed = wanted.len() - todo.len();
    if let Some(p) = csv_path {
        // make sure the header and resumed rows are on disk before appending
        write_all(p, &done.values().cloned().collect::<Vec<_>>())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<SweepRecord>();
    let fresh: Vec<SweepRecord> = std::thread::scope(|scope| -> Result<Vec<SweepRecord>> {
        let todo = &todo;
        scope.spawn(move || {
            pool.install(|| {
                todo.par_iter().for_each_with(tx, |tx, &(a, t)| {
                    let _ = tx.send(run_point(spec, a, t));
                });
            });
        });
        let mut appender = match csv_path {
            Some(p) => Some(
                csv::WriterBuilder::new()
                    .has_headers(false)
                    .from_writer(
                        std::fs::OpenOptions::new()
                            .append(true)
                            .open(p)
                            .map_err(|e| Error::io(p, e))?,
                    ),
            ),
            None => None,
        };
        let mut got = Vec::with_capacity(todo.len());
        for rec in rx {
            if let Some(w) = appender.as_mut() {
                let ok = w.write_record(rec.row()).and_then(|_| w.flush().map_err(csv::Error::from));
                if let Err(e) = ok {
                    log::warn!("could not append sweep row: {e}");
                }
            }
            log::info!(
                "α = {} κT = {} ε = {:.4e} {}",
                rec.alpha,
                rec.kappa_t,
                rec.epsilon,
                rec.error
            );
            got.push(rec);
        }
        Ok(got)
    })?;
    for r in fresh {
        done.insert(r.key(), r);
    }
    let mut records: Vec<SweepRecord> = wanted
        .iter()
        .filter_map(|&(a, t)| done.get(&key_of(a, t)).cloned())
        .collect();
    records.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.kappa_t.total_cmp(&b.kappa_t)));
    if let Some(p) = csv_path {
        write_all(p, &records)?;
    }
    let (t_fit, alpha_fit) = fits(spec, &records);
    Ok(SweepResult {
        records,
        t_fit,
        alpha_fit,
        resumed,
    })
}

fn fits(spec: &SweepSpec, records: &[SweepRecord]) -> (Option<FitResult>, Option<FitResult>) {
    let a0 = fmt_num(spec.fit_alpha());
    let t0 = fmt_num(spec.fit_kappa_t());
    let (ts, es): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.is_ok() && fmt_num(r.alpha) == a0)
        .map(|r| (r.kappa_t, r.epsilon))
        .unzip();
    let (als, eas): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.is_ok() && fmt_num(r.kappa_t) == t0)
        .map(|r| (r.alpha, r.epsilon))
        .unzip();
    (power_law_fit(&ts, &es), power_law_fit(&als, &eas))
}

/// Gap of the static two-root Liouvillian with roots `±s/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPoint {
    pub separation: f64,
    pub n_trunc: usize,
    pub gap_over_kappa: std::result::Result<f64, String>,
}

impl GapPoint {
    /// `(gap/κ)/s²`
    pub fn ratio(&self) -> Option<f64> {
        self.gap_over_kappa.as_ref().ok().map(|g| g / (self.separation * self.separation))
    }
}

const GAP_N_TRUNC_STEP: usize = 6;
const GAP_MAX_N_TRUNC: usize = 60;

/// Dense-Liouvillian gaps for `d = 2` at each separation.
pub fn gap_sweep(separations: &[f64], kappa: f64, n_trunc: Option<usize>, tail_tol: f64) -> Vec<GapPoint> {
    separations
        .iter()
        .map(|&s| {
            let res = (|| -> Result<(usize, f64)> {
                let half = 0.5 * s;
                let roots = vec![C64::from(half), C64::from(-half)];
                let gap_at = |space: &SpaceConfig| -> Result<f64> {
                    let f = build_jump(&JumpSpec::new(kappa, roots.clone())?, space)?;
                    dissipation_gap_with_null_dim(&liouvillian_matrix(&f), kappa, NULL_TOL, 4)
                };
                if let Some(n) = n_trunc {
                    let space = SpaceConfig::new(n, tail_tol)?;
                    return Ok((n, gap_at(&space)?));
                }
                // grow the truncation until the four-fold null cluster resolves
                let mut space = SpaceConfig::sufficient(half, tail_tol)?;
                loop {
                    match gap_at(&space) {
                        Ok(g) => return Ok((space.n_trunc, g)),
                        Err(Error::IllConditioned(_)) if space.n_trunc < GAP_MAX_N_TRUNC => {
                            space = SpaceConfig::new(space.n_trunc + GAP_N_TRUNC_STEP, tail_tol)?;
                        }
                        Err(e) => return Err(e),
                    }
                }
            })();
            match res {
                Ok((n, g)) => GapPoint {
                    separation: s,
                    n_trunc: n,
                    gap_over_kappa: Ok(g),
                },
                Err(e) => GapPoint {
                    separation: s,
                    n_trunc: n_trunc.unwrap_or(0),
                    gap_over_kappa: Err(e.to_string()),
                },
            }
        })
        .collect()
}

/// Log-log fit of gap against separation over the successful points with
/// `s > 0`.
pub fn gap_fit(points: &[GapPoint]) -> Option<FitResult> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|p| p.gap_over_kappa.as_ref().ok().map(|g| (p.separation, *g)))
        .unzip();
    power_law_fit(&xs, &ys)
}

pub fn write_gap_csv(points: &[GapPoint], path: &Path) -> Result<()> {
    let mut out = String::from("separation,n_trunc,gap_over_kappa,ratio_to_separation_sq,error\n");
    for p in points {
        let (g, err) = match &p.gap_over_kappa {
            Ok(g) => (*g, String::new()),
            Err(e) => (f64::NAN, e.replace([',', '\n'], ";")),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_num(p.separation),
            p.n_trunc,
            fmt_num(g),
            fmt_num(p.ratio().unwrap_or(f64::NAN)),
            err
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
