//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `HOLOCAT_ACCEPTANCE_ONLY=3,4` restricts the run to a subset;
//! `HOLOCAT_ACCEPTANCE_DIR` keeps the sweep CSVs (and resumes from them).

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::PathBuf;

use holocat::catcode::CatBasis;
use holocat::fockspace::{coherent_state, SpaceConfig, StateVector, C64};
use holocat::gates::{zeno_gate_error, zeno_identity_residual, CollisionGateSpec};
use holocat::harness::metrics::wrap_phase;
use holocat::harness::runner::{GateReport, GateTemplate, IntegrationSettings, PreparedGate};
use holocat::harness::sweep::{gap_sweep, scaling_sweep, GridShape, SweepSpec};
use holocat::holonomy::{
    berry_connection, collision_holonomy, lme_berry_connection, rank_check, su_d_generators, BasisFamily, PolarFamily, DEFAULT_DELTA,
};
use holocat::liouvillian::{
    build_jump, conserved_quantities, evolve, liouvillian_matrix, steady_space, symmetric_roots, DensityOperator,
    JumpSpec, Schedule, StaticRoots,
};

const TAIL_TOL: f64 = SpaceConfig::DEFAULT_TAIL_TOL;

// 1
const STEADY_TRACE_DISTANCE: f64 = 1e-3;
// 2
const NULL_TOL: f64 = 1e-7;
// 3, 4
const PHASE_TOL: f64 = 0.05;
const LOOP_MIN_FIDELITY: f64 = 0.98;
const COLLISION_D3_MIN_FIDELITY: f64 = 0.97;
const GATE_KAPPA_T: f64 = 200.0;
// 5
const SMALL_ALPHA_TOL: f64 = 1e-3;
const LARGE_ALPHA_REL_TOL: f64 = 0.01;
const MODULUS_MAX: f64 = 1e-6;
// 6
const LME_RESIDUAL: f64 = 1e-4;
const CROSS_TALK: f64 = 1e-6;
const LME_N_TRUNC: usize = 40;
// 7
const ZENO_RESIDUAL: f64 = 1e-3;
const ZENO_RATIO: (f64, f64) = (1.6, 2.5);
// 9
const T_SLOPE: (f64, f64) = (-1.0, 0.1);
const P_LOOP_D2: (f64, f64) = (1.8, 0.5);
const P_COLLISION_MAX: f64 = 0.3;
const P_LOOP_D3_MIN: f64 = 2.5;
// 10
const GAP_REL_TOL: f64 = 0.10;
// 11
const AUDIT_PHASE_CHANGE: f64 = 0.01;
const AUDIT_EPSILON_CHANGE: f64 = 0.05;

struct Outcome {
    failed: Vec<String>,
}

impl Outcome {
    fn record(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn note(text: String) {
    println!("       note: {text}");
}

fn list(xs: &[f64], sci: bool) -> String {
    xs.iter()
        .map(|x| if sci { format!("{x:.3e}") } else { format!("{x:.3}") })
        .collect::<Vec<_>>()
        .join(", ")
}

fn selected() -> Option<BTreeSet<String>> {
    std::env::var("HOLOCAT_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').map(|x| x.trim().to_string()).collect())
}

fn sweep_dir() -> (PathBuf, Option<tempfile::TempDir>) {
    match std::env::var("HOLOCAT_ACCEPTANCE_DIR") {
        Ok(d) => {
            std::fs::create_dir_all(&d).unwrap();
            (PathBuf::from(d), None)
        }
        Err(_) => {
            let t = tempfile::tempdir().unwrap();
            (t.path().to_path_buf(), Some(t))
        }
    }
}

fn steady_state_d1(out: &mut Outcome) {
    let cfg = SpaceConfig::new(40, TAIL_TOL).unwrap();
    let alpha = C64::from(1.5);
    let rho0 = DensityOperator::pure(&StateVector::fock(0, &cfg).unwrap());
    let path = StaticRoots {
        roots: vec![alpha],
        duration: 30.0,
    };
    let schedule = Schedule::auto_rk4(&path, 1.0, &cfg);
    let result = evolve(&rho0, 1.0, &path, &schedule, &cfg)
        .map(|t| t.final_state().trace_distance(&DensityOperator::pure(&coherent_state(alpha, &cfg).unwrap())));
    match result {
        Ok(d) => out.record("1", "steady state d=1", d < STEADY_TRACE_DISTANCE, format!("trace distance {d:.3e}")),
        Err(e) => out.record("1", "steady state d=1", false, e.to_string()),
    }
}

fn steady_dimension(out: &mut Outcome) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, alpha) in [(2usize, 2.0), (3, 2.5)] {
        let cfg = SpaceConfig::new(40, TAIL_TOL).unwrap();
        let f = build_jump(&JumpSpec::symmetric(1.0, d, C64::from(alpha)).unwrap(), &cfg).unwrap();
        match steady_space(&liouvillian_matrix(&f), 1.0, NULL_TOL) {
            Ok(s) => {
                pass &= s.dim == d * d;
                parts.push(format!("(d={d}, α={alpha}) dim {} next rate {:.3e}", s.dim, s.next_rate));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("(d={d}, α={alpha}) {e}"));
            }
        }
    }
    out.record("2", "steady-space dimension d²", pass, parts.join("; "));
}

fn run(prepared: &PreparedGate, settings: &IntegrationSettings) -> Result<GateReport, String> {
    prepared.run(settings).map_err(|e| e.to_string())
}

fn describe(r: &GateReport) -> String {
    let phase = match &r.phase {
        Ok(p) => format!("{p:.5}"),
        Err(e) => e.clone(),
    };
    format!(
        "phase {phase} (expected {:.5}), fidelity {:.5}, ε {:.3e}, n_trunc {}, steps {}, {:.0} s",
        r.expected_phase, r.fidelity, r.outcome.impurity, r.n_trunc, r.steps, r.wall_time
    )
}

struct GateRuns {
    cases: Vec<(String, PreparedGate, Result<GateReport, String>)>,
}

fn gate_phases(out: &mut Outcome, run3: bool, run4: bool) -> GateRuns {
    let settings = IntegrationSettings::default();
    let mut cases = Vec::new();
    if run3 {
        let p = GateTemplate::loop_gate(2, PI / 4.0)
            .prepare(2.0, GATE_KAPPA_T, None, TAIL_TOL)
            .unwrap();
        let r = run(&p, &settings);
        match &r {
            Ok(rep) => {
                let ok = rep.phase_error().is_some_and(|e| e < PHASE_TOL) && rep.fidelity >= LOOP_MIN_FIDELITY;
                out.record("3", "loop-gate phase", ok, describe(rep));
            }
            Err(e) => out.record("3", "loop-gate phase", false, e.clone()),
        }
        cases.push(("loop d=2".to_string(), p, r));
    }
    if run4 {
        let mut pass = true;
        let mut parts = Vec::new();
        for (d, phi) in [(2usize, PI / 2.0), (3, 2.0 * PI / 3.0)] {
            let p = GateTemplate::collision(d, phi)
                .prepare(2.0, GATE_KAPPA_T, None, TAIL_TOL)
                .unwrap();
            let r = run(&p, &settings);
            match &r {
                Ok(rep) => {
                    let phase_ok = rep.phase_error().is_some_and(|e| e < PHASE_TOL);
                    let fid_ok = d == 2 || rep.fidelity >= COLLISION_D3_MIN_FIDELITY;
                    pass &= phase_ok && fid_ok;
                    parts.push(format!("d={d}: {}", describe(rep)));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("d={d}: {e}"));
                }
            }
            cases.push((format!("collision d={d}"), p, r));
        }
        out.record("4", "collision-gate phase", pass, parts.join("; "));
        for d in [2usize, 3] {
            let phi = if d == 2 { PI / 2.0 } else { 2.0 * PI / 3.0 };
            let space = SpaceConfig::sufficient(2.0, 1e-8).unwrap();
            if let Ok(h) = collision_holonomy(&CollisionGateSpec::symmetric(phi), 2.0, d, &space) {
                let m = h.matrix;
                note(format!(
                    "Berry holonomy at α=2, d={d}: relative phase (1,0) {:.5}",
                    (m[(1, 1)] * m[(0, 0)].conj()).arg()
                ));
            }
        }
    }
    GateRuns { cases }
}

fn berry_limits(out: &mut Outcome) {
    let space = |r: f64| SpaceConfig::sufficient(r + 0.01, 1e-8).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let small = berry_connection(&PolarFamily::phase(2, 0.05, space(0.05)), 0.0, DEFAULT_DELTA).unwrap();
    let e_small = (0..2).map(|mu| (small.value[(mu, mu)] + mu as f64).norm()).fold(0.0, f64::max);
    pass &= e_small < SMALL_ALPHA_TOL;
    parts.push(format!("α=0.05 max |A^φ_μμ + μ| {e_small:.3e}"));
    let large = berry_connection(&PolarFamily::phase(2, 3.0, space(3.0)), 0.0, DEFAULT_DELTA).unwrap();
    let e_large = (0..2).map(|mu| ((large.value[(mu, mu)] + 9.0) / 9.0).norm()).fold(0.0, f64::max);
    pass &= e_large < LARGE_ALPHA_REL_TOL;
    parts.push(format!("α=3 max relative deviation from −|α|² {e_large:.3e}"));
    let mut modulus = 0.0f64;
    for r in [0.05, 0.5, 1.0, 2.0, 3.0, 4.0] {
        let a = berry_connection(&PolarFamily::modulus(2, 0.0, space(r)), r, DEFAULT_DELTA).unwrap();
        modulus = modulus.max(a.max_entry());
    }
    pass &= modulus < MODULUS_MAX;
    parts.push(format!("max |A^|α|| {modulus:.3e}"));
    out.record("5", "Berry-connection limits", pass, parts.join("; "));
}

fn lme_decomposition(out: &mut Outcome) {
    let s = SpaceConfig::new(LME_N_TRUNC, TAIL_TOL).unwrap();
    let phi = 0.3;
    let fam = PolarFamily::phase(2, 2.0, s);
    let basis: CatBasis = fam.basis_at(phi).unwrap();
    let roots: Vec<C64> = symmetric_roots(2, C64::from_polar(2.0, phi));
    let f = build_jump(&JumpSpec::new(1.0, roots).unwrap(), &s).unwrap();
    let result = conserved_quantities(&liouvillian_matrix(&f), &basis.states, 1.0, NULL_TOL)
        .and_then(|j| lme_berry_connection(&fam, &j, phi, DEFAULT_DELTA));
    match result {
        Ok(l) => out.record(
            "6",
            "LME-connection decomposition",
            l.decomposition_residual < LME_RESIDUAL && l.cross_talk < CROSS_TALK,
            format!("residual {:.3e}, cross-talk {:.3e}", l.decomposition_residual, l.cross_talk),
        ),
        Err(e) => out.record("6", "LME-connection decomposition", false, e.to_string()),
    }
}

fn zeno(out: &mut Outcome) {
    let cfg = SpaceConfig::new(30, TAIL_TOL).unwrap();
    let alpha = C64::from(2.0);
    let ms = [25usize, 50, 100, 200];
    let phi = PI / 2.0;
    let residuals: Vec<f64> = ms
        .iter()
        .map(|&m| zeno_identity_residual(phi, alpha, 2, m, &cfg).unwrap())
        .collect();
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let small = residuals[3] < ZENO_RESIDUAL;
    let halving = ratios.iter().all(|r| (ZENO_RATIO.0..=ZENO_RATIO.1).contains(r));
    out.record(
        "7",
        "Zeno identity",
        small && halving,
        format!(
            "residual at M=200 {:.3e} ({}); residuals [{}], doubling ratios [{}] ({})",
            residuals[3],
            if small { "below 1e-3" } else { "above 1e-3" },
            list(&residuals, true),
            list(&ratios, false),
            if halving { "first order" } else { "no 2× reduction" }
        ),
    );
    let gate: Vec<f64> = ms
        .iter()
        .map(|&m| zeno_gate_error(phi, alpha, 2, m, &cfg).unwrap())
        .collect();
    let gate_ratios: Vec<f64> = gate.windows(2).map(|w| w[0] / w[1]).collect();
    note(format!(
        "projector product against the ideal gate: errors [{}], doubling ratios [{}]",
        list(&gate, true),
        list(&gate_ratios, false)
    ));
}

fn universality(out: &mut Outcome) {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in 2..=5usize {
        let alpha = 4.0;
        let space = SpaceConfig::sufficient(alpha, 1e-8).unwrap();
        match su_d_generators(d, alpha, &space) {
            Ok(g) => {
                let r = rank_check(&g);
                pass &= r == d * d - 1;
                parts.push(format!("d={d}: {r}"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("d={d}: {e}"));
            }
        }
    }
    out.record("8", "universality rank", pass, parts.join(", "));
}

fn sweep_spec(template: GateTemplate, alphas: &[f64], kappa_ts: &[f64], shape: GridShape) -> SweepSpec {
    SweepSpec {
        template,
        alphas: alphas.to_vec(),
        kappa_ts: kappa_ts.to_vec(),
        shape,
        settings: IntegrationSettings::default(),
        n_trunc: None,
        tail_tol: TAIL_TOL,
        compute_gap: false,
    }
}

fn impurity_scaling(out: &mut Outcome) {
    let (dir, _keep) = sweep_dir();
    let mut pass = true;
    let mut parts = Vec::new();

    let loop2 = sweep_spec(
        GateTemplate::loop_gate(2, PI / 4.0),
        &[2.0, 2.5, 3.0, 3.5],
        &[50.0, 100.0, 200.0, 400.0],
        GridShape::Cross,
    );
    match scaling_sweep(&loop2, 1, Some(&dir.join("loop_d2.csv"))) {
        Ok(r) => {
            for rec in &r.records {
                note(format!(
                    "loop d=2 α={} κT={}: ε {:.4e}, n_trunc {} {}",
                    rec.alpha, rec.kappa_t, rec.epsilon, rec.n_trunc, rec.error
                ));
            }
            match (&r.t_fit, &r.alpha_fit) {
                (Some(t), Some(a)) => {
                    let p = -a.slope;
                    let t_ok = (t.slope - T_SLOPE.0).abs() <= T_SLOPE.1;
                    let p_ok = (p - P_LOOP_D2.0).abs() <= P_LOOP_D2.1;
                    pass &= t_ok && p_ok;
                    parts.push(format!(
                        "loop d=2 T-slope {:.3} ± {:.3} (R² {:.3}), p {p:.3} ± {:.3} (R² {:.3})",
                        t.slope, t.std_error, t.r_squared, a.std_error, a.r_squared
                    ));
                }
                _ => {
                    pass = false;
                    parts.push("loop d=2 fit unavailable".into());
                }
            }
        }
        Err(e) => {
            pass = false;
            parts.push(format!("loop d=2 {e}"));
        }
    }

    let coll2 = sweep_spec(
        GateTemplate::collision(2, PI / 2.0),
        &[2.0, 2.5, 3.0, 3.5],
        &[GATE_KAPPA_T],
        GridShape::Full,
    );
    match scaling_sweep(&coll2, 1, Some(&dir.join("collision_d2.csv"))) {
        Ok(r) => {
            for rec in &r.records {
                note(format!(
                    "collision d=2 α={} κT={}: ε {:.4e}, n_trunc {} {}",
                    rec.alpha, rec.kappa_t, rec.epsilon, rec.n_trunc, rec.error
                ));
            }
            match &r.alpha_fit {
                Some(a) => {
                    let p = -a.slope;
                    pass &= p.abs() <= P_COLLISION_MAX;
                    parts.push(format!("collision d=2 p {p:.3} ± {:.3} (R² {:.3})", a.std_error, a.r_squared));
                }
                None => {
                    pass = false;
                    parts.push("collision d=2 fit unavailable".into());
                }
            }
        }
        Err(e) => {
            pass = false;
            parts.push(format!("collision d=2 {e}"));
        }
    }

    // a short, small loop keeps the d = 3 truncations affordable
    let loop3 = sweep_spec(
        GateTemplate::loop_gate(3, PI * 0.25 * 0.25),
        &[2.4, 2.7, 3.0, 3.3],
        &[20.0],
        GridShape::Full,
    );
    match scaling_sweep(&loop3, 1, Some(&dir.join("loop_d3.csv"))) {
        Ok(r) => {
            for rec in &r.records {
                note(format!(
                    "loop d=3 α={} κT={}: ε {:.4e}, n_trunc {} {}",
                    rec.alpha, rec.kappa_t, rec.epsilon, rec.n_trunc, rec.error
                ));
            }
            match &r.alpha_fit {
                Some(a) => {
                    let p = -a.slope;
                    pass &= p > P_LOOP_D3_MIN;
                    parts.push(format!(
                        "loop d=3 p {p:.3} ± {:.3} (R² {:.3}{})",
                        a.std_error,
                        a.r_squared,
                        if a.low_confidence { ", low confidence" } else { "" }
                    ));
                }
                None => {
                    pass = false;
                    parts.push("loop d=3 fit unavailable".into());
                }
            }
        }
        Err(e) => {
            pass = false;
            parts.push(format!("loop d=3 {e}"));
        }
    }
    out.record("9", "impurity scaling", pass, parts.join("; "));
}

fn gap_scaling(out: &mut Outcome) {
    let points = gap_sweep(&[4.0, 5.0, 6.0], 1.0, None, TAIL_TOL);
    let mut pass = true;
    let mut parts = Vec::new();
    for p in &points {
        match &p.gap_over_kappa {
            Ok(g) => {
                let target = p.separation * p.separation;
                pass &= ((g - target) / target).abs() <= GAP_REL_TOL;
                parts.push(format!(
                    "s={}: gap/κ {g:.4} vs s² {target} (gap/s² {:.4}, n_trunc {})",
                    p.separation,
                    g / target,
                    p.n_trunc
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("s={}: {e}", p.separation));
            }
        }
    }
    out.record("10", "dissipation-gap scaling", pass, parts.join("; "));
}

fn convergence_audit(out: &mut Outcome, runs: &GateRuns) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, prepared, base) in &runs.cases {
        let Ok(base) = base else {
            pass = false;
            parts.push(format!("{name}: base run failed"));
            continue;
        };
        let Ok(base_phase) = base.phase.clone() else {
            pass = false;
            parts.push(format!("{name}: base phase unavailable"));
            continue;
        };
        let doubled = SpaceConfig::new(2 * prepared.space.n_trunc, prepared.space.tail_tol)
            .and_then(|s| prepared.with_space(s))
            .map_err(|e| e.to_string())
            .and_then(|p| run(&p, &IntegrationSettings::default()));
        match doubled {
            Ok(r) => match r.phase {
                Ok(ph) => {
                    let change = wrap_phase(ph - base_phase).abs();
                    pass &= change < AUDIT_PHASE_CHANGE;
                    parts.push(format!("{name}: n_trunc {}→{} phase change {change:.2e}", base.n_trunc, r.n_trunc));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("{name}: doubled n_trunc {e}"));
                }
            },
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: doubled n_trunc {e}"));
            }
        }
        let halved = IntegrationSettings {
            steps: Some(2 * base.steps),
            ..IntegrationSettings::default()
        };
        match run(prepared, &halved) {
            Ok(r) => {
                let change = ((r.outcome.impurity - base.outcome.impurity) / base.outcome.impurity).abs();
                pass &= change < AUDIT_EPSILON_CHANGE;
                parts.push(format!("{name}: steps {}→{} ε change {:.2}%", base.steps, r.steps, 100.0 * change));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: halved step {e}"));
            }
        }
    }
    out.record("11", "convergence audit", pass, parts.join("; "));
}

fn main() {
    let only = selected();
    let want = |id: &str| only.as_ref().is_none_or(|s| s.contains(id));
    let mut out = Outcome { failed: Vec::new() };
    if want("1") {
        steady_state_d1(&mut out);
    }
    if want("2") {
        steady_dimension(&mut out);
    }
    let audit = want("11");
    let runs = gate_phases(&mut out, want("3") || audit, want("4") || audit);
    if want("5") {
        berry_limits(&mut out);
    }
    if want("6") {
        lme_decomposition(&mut out);
    }
    if want("7") {
        zeno(&mut out);
    }
    if want("8") {
        universality(&mut out);
    }
    if want("9") {
        impurity_scaling(&mut out);
    }
    if want("10") {
        gap_scaling(&mut out);
    }
    if audit {
        convergence_audit(&mut out, &runs);
    }
    if out.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {}", out.failed.join(", "));
        std::process::exit(1);
    }
}
