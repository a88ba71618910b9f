//! Command-line front end. Exit codes: 0 success, 1 validation error,
//! 2 numerical failure (including a failed gate check).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::config::{RunConfig, Summary};
use super::sweep::{gap_fit, gap_sweep, scaling_sweep, write_gap_csv};
use crate::catcode::CatBasis;
use crate::error::{Error, Result};
use crate::fockspace::{wigner, PhaseGrid, SpaceConfig, C64};
use crate::holonomy::{berry_connection, rank_check, su_d_generators, write_connection_csv, PolarFamily, DEFAULT_DELTA};
use crate::liouvillian::DensityOperator;

#[derive(Debug, Parser)]
#[command(name = "holocat", version, about = "Dissipative cat-code gate simulator")]
pub struct Cli {
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Reserved; the dynamics are deterministic
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Override the Fock truncation
    #[arg(long = "n-trunc", global = true)]
    pub n_trunc: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConnectionParam {
    Phase,
    Modulus,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One gate run: trajectory CSV and summary
    Simulate,
    /// Run the configured gate and compare with its ideal holonomy
    GateCheck {
        #[arg(long, default_value_t = 0.05)]
        phase_tol: f64,
        #[arg(long, default_value_t = 0.98)]
        min_fidelity: f64,
    },
    /// Impurity-scaling sweep from the [sweep] section
    Sweep,
    /// Dissipation gap of the two-root Liouvillian against root separation
    Gap {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 4.0, 5.0, 6.0])]
        separations: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Wigner function of a cat state, or of the configured gate's input
    /// or output state
    Wigner {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        mu: usize,
        /// Render the state after the configured gate (needs --config)
        #[arg(long)]
        r#final: bool,
        /// Half-width of the square grid; defaults to the state's extent
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 121)]
        points: usize,
    },
    /// Berry connection of the symmetric cat basis along |α| or arg α
    Connections {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value_t = ConnectionParam::Phase)]
        param: ConnectionParam,
        /// Fixed coordinate: |α| for the phase connection, arg α otherwise
        #[arg(long, default_value_t = 2.0)]
        fixed: f64,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
    /// Dimension of the Lie algebra generated by the projector set
    Rank {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config PATH".into()))?;
    RunConfig::load(path)
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    Ok(&cli.out)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate => simulate(cli),
        Command::GateCheck { phase_tol, min_fidelity } => gate_check(cli, *phase_tol, *min_fidelity),
        Command::Sweep => sweep(cli),
        Command::Gap { separations, kappa } => gap(cli, separations, *kappa),
        Command::Wigner {
            d,
            alpha,
            mu,
            r#final,
            radius,
            points,
        } => render_wigner(cli, *d, *alpha, *mu, *r#final, *radius, *points),
        Command::Connections {
            d,
            param,
            fixed,
            from,
            to,
            points,
            delta,
        } => connections(cli, *d, *param, *fixed, (*from, *to), *points, *delta),
        Command::Rank { d, alpha } => rank(cli, *d, *alpha),
    }
}

fn gate_summary(cfg: &RunConfig, cli: &Cli, report: &super::runner::GateReport) -> Summary {
    let out = &report.outcome;
    let log = &out.trajectory.corrections;
    let mut s = Summary::new();
    s.text("gate_kind", cfg.gate.kind.as_str())
        .int("d", cfg.jump.d)
        .num("alpha", cfg.jump.alpha)
        .num("kappa", cfg.jump.kappa)
        .num("kappa_T", cfg.path.t)
        .int("n_trunc", report.n_trunc)
        .text("truncation_rule", "n_trunc >= |alpha|^2 + 5|alpha| + 5, raised until the tail check passes")
        .text("integrator", &format!("{:?}", out.trajectory.schedule.method).to_lowercase())
        .int("steps", report.steps)
        .int("generator_applications", out.trajectory.generator_applications)
        .num("max_trace_drift", log.max_trace_drift)
        .num("max_hermiticity_residual", log.max_hermiticity_residual)
        .num("max_tail_weight", log.max_tail_weight)
        .num("epsilon", out.impurity)
        .num("leakage", out.leakage)
        .num("dfs_fidelity", report.fidelity)
        .num("expected_phase", report.expected_phase);
    match &report.phase {
        Ok(p) => s.num("phase", *p),
        Err(e) => s.text("phase_error", e),
    };
    s.int("seed", cli.seed as usize).num("wall_time", report.wall_time);
    s
}

fn prepare(cli: &Cli, cfg: &RunConfig) -> Result<super::runner::PreparedGate> {
    cfg.template()
        .prepare(cfg.jump.alpha, cfg.path.t * cfg.jump.kappa, cfg.space(cli.n_trunc)?, cfg.tail_tol())
}

fn simulate(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    let prepared = prepare(cli, &cfg)?;
    let mut settings = cfg.integrator.clone();
    settings.samples = settings.samples.max(100);
    let report = prepared.run(&settings)?;
    let dir = out_dir(cli)?;
    let a = crate::fockspace::ladder_operators(&prepared.space).a;
    report
        .outcome
        .trajectory
        .write_csv(dir.join("trajectory.csv"), &prepared.space, &[("a", &a)])?;
    let summary = gate_summary(&cfg, cli, &report);
    summary.write(&dir.join("summary.toml"))?;
    print!("{}", summary.render());
    Ok(0)
}

fn gate_check(cli: &Cli, phase_tol: f64, min_fidelity: f64) -> Result<i32> {
    let cfg = load_config(cli)?;
    let prepared = prepare(cli, &cfg)?;
    let report = prepared.run(&cfg.integrator)?;
    let ok_phase = report.phase_error().is_some_and(|e| e < phase_tol);
    let ok_fid = report.fidelity >= min_fidelity;
    match &report.phase {
        Ok(p) => println!("phase = {}", show(*p)),
        Err(e) => println!("phase unavailable: {e}"),
    }
    println!("expected_phase = {}", show(report.expected_phase));
    println!("fidelity = {}", show(report.fidelity));
    println!("epsilon = {}", show(report.outcome.impurity));
    println!("leakage = {}", show(report.outcome.leakage));
    let pass = ok_phase && ok_fid;
    println!("check = {}", if pass { "pass" } else { "fail" });
    if let Ok(dir) = out_dir(cli) {
        let mut s = gate_summary(&cfg, cli, &report);
        s.flag("check_passed", pass).num("phase_tol", phase_tol).num("min_fidelity", min_fidelity);
        s.write(&dir.join("gate_check.toml"))?;
    }
    Ok(if pass { 0 } else { 2 })
}

fn sweep(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    let spec = cfg.sweep_spec(cli.n_trunc)?;
    let dir = out_dir(cli)?;
    let result = scaling_sweep(&spec, cli.threads, Some(&dir.join("sweep.csv")))?;
    let mut s = Summary::new();
    s.text("gate_kind", spec.template.kind.as_str())
        .int("d", spec.template.d)
        .int("points", result.records.len())
        .int("resumed", result.resumed)
        .int("failed", result.records.iter().filter(|r| !r.is_ok()).count());
    for (name, fit) in [("kappa_T", &result.t_fit), ("alpha", &result.alpha_fit)] {
        match fit {
            Some(f) => {
                s.num(&format!("{name}_slope"), f.slope)
                    .num(&format!("{name}_std_error"), f.std_error)
                    .num(&format!("{name}_r_squared"), f.r_squared)
                    .int(&format!("{name}_samples"), f.samples)
                    .flag(&format!("{name}_low_confidence"), f.low_confidence);
            }
            None => {
                s.text(&format!("{name}_fit"), "unavailable");
            }
        }
    }
    if let Some(f) = &result.alpha_fit {
        s.num("p", -f.slope);
    }
    s.write(&dir.join("fits.toml"))?;
    print!("{}", s.render());
    Ok(0)
}

fn gap(cli: &Cli, separations: &[f64], kappa: f64) -> Result<i32> {
    let tail_tol = match &cli.config {
        Some(_) => load_config(cli)?.tail_tol(),
        None => SpaceConfig::DEFAULT_TAIL_TOL,
    };
    let points = gap_sweep(separations, kappa, cli.n_trunc, tail_tol);
    let dir = out_dir(cli)?;
    write_gap_csv(&points, &dir.join("gap.csv"))?;
    println!("separation,n_trunc,gap_over_kappa,ratio_to_separation_sq");
    for p in &points {
        match &p.gap_over_kappa {
            Ok(g) => println!(
                "{},{},{},{}",
                show(p.separation),
                p.n_trunc,
                show(*g),
                show(p.ratio().unwrap_or(f64::NAN))
            ),
            Err(e) => println!("{},{},error: {e}", show(p.separation), p.n_trunc),
        }
    }
    let nonzero: Vec<_> = points.iter().filter(|p| p.separation > 0.0).cloned().collect();
    if let Some(f) = gap_fit(&nonzero) {
        println!("log-log slope = {} (R² = {})", show(f.slope), show(f.r_squared));
    }
    Ok(if points.iter().all(|p| p.gap_over_kappa.is_ok()) { 0 } else { 2 })
}

fn render_wigner(cli: &Cli, d: usize, alpha: f64, mu: usize, final_state: bool, radius: Option<f64>, points: usize) -> Result<i32> {
    let (rho, space, extent) = if cli.config.is_some() {
        let cfg = load_config(cli)?;
        let prepared = prepare(cli, &cfg)?;
        if final_state {
            let report = prepared.run(&cfg.integrator)?;
            (report.outcome.final_state().clone(), prepared.space, prepared.path.max_abs_root(256))
        } else {
            (prepared.rho0.clone(), prepared.space, prepared.path.max_abs_root(256))
        }
    } else {
        if final_state {
            return Err(Error::Config("--final needs --config".into()));
        }
        let space = match cli.n_trunc {
            Some(n) => SpaceConfig::with_dim(n)?,
            None => SpaceConfig::sufficient(alpha, SpaceConfig::DEFAULT_TAIL_TOL)?,
        };
        let basis = CatBasis::symmetric(d, C64::from(alpha), &space)?;
        let state = basis
            .states
            .get(mu)
            .ok_or_else(|| Error::InvalidSpec(format!("μ = {mu} out of range for d = {d}")))?;
        (DensityOperator::pure(state), space, alpha)
    };
    let radius = radius.unwrap_or(extent + 2.0);
    let grid = PhaseGrid::square(radius, points);
    // the grid corner must lie within √n/2; pad ρ with empty levels
    let need = (4.0 * grid.max_radius().powi(2)).ceil() as usize;
    let (rho, space) = if need > space.n_trunc {
        let n = space.n_trunc;
        let padded = rho.matrix().clone().resize(need, need, C64::from(0.0));
        debug_assert_eq!(padded.view((0, 0), (n, n)), rho.matrix().view((0, 0), (n, n)));
        (DensityOperator::new(padded)?, SpaceConfig::new(need, space.tail_tol)?)
    } else {
        (rho, space)
    };
    let w = wigner(&rho, &grid, &space)?;
    let dir = out_dir(cli)?;
    w.write_pgm(dir.join("wigner.pgm"))?;
    w.write_csv(dir.join("wigner.csv"))?;
    println!("integral = {}", show(w.integral()));
    println!("wrote {}", dir.join("wigner.pgm").display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn connections(
    cli: &Cli,
    d: usize,
    param: ConnectionParam,
    fixed: f64,
    range: (f64, f64),
    points: usize,
    delta: f64,
) -> Result<i32> {
    let space = match cli.n_trunc {
        Some(n) => SpaceConfig::with_dim(n)?,
        None => {
            let r = match param {
                ConnectionParam::Phase => fixed,
                ConnectionParam::Modulus => range.0.abs().max(range.1.abs()),
            };
            SpaceConfig::sufficient(r + delta, SpaceConfig::DEFAULT_TAIL_TOL)?
        }
    };
    let family = match param {
        ConnectionParam::Phase => PolarFamily::phase(d, fixed, space),
        ConnectionParam::Modulus => PolarFamily::modulus(d, fixed, space),
    };
    let n = points.max(1);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let l = if n == 1 { range.0 } else { range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64 };
        samples.push(berry_connection(&family, l, delta)?);
    }
    let dir = out_dir(cli)?;
    write_connection_csv(&samples, dir.join("connections.csv"))?;
    let max_entry = samples.iter().map(|s| s.max_entry()).fold(0.0, f64::max);
    let max_off = samples.iter().map(|s| s.max_off_diagonal()).fold(0.0, f64::max);
    println!("parameter = {}", family.parameter.label());
    println!("samples = {}", samples.len());
    println!("max_entry = {}", show(max_entry));
    println!("max_off_diagonal = {}", show(max_off));
    Ok(0)
}

fn rank(cli: &Cli, d: usize, alpha: f64) -> Result<i32> {
    let space = match cli.n_trunc {
        Some(n) => SpaceConfig::with_dim(n)?,
        None => SpaceConfig::sufficient(alpha, SpaceConfig::DEFAULT_TAIL_TOL)?,
    };
    let gens = su_d_generators(d, alpha, &space)?;
    println!("{}", rank_check(&gens));
    Ok(0)
}

fn show(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e5).contains(&a) {
        format!("{v:.6}")
    } else {
        format!("{v:.4e}")
    }
}
