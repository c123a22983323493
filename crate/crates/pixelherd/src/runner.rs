//! End-to-end run orchestration: load an image, solve, emit artifacts.
//!
//! A run writes five files into the output directory:
//!
//! * `final.pgm`          — the quantized image;
//! * `controls.csv`       — `t, eps_x, eps_c`, one row per time step;
//! * `cost_history.csv`   — per-iteration objective (plus the primal
//!   residual for the splitting solver);
//! * `pixels.csv`         — `x, y, c_initial, c_final` per pixel;
//! * `clusters.txt`       — the intensity-cluster summary.
//!
//! Floats are written with 17 significant digits so the CSVs round-trip
//! bit-faithfully, and every numeric path is deterministic: the same
//! configuration produces byte-identical files, at any thread count.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::admm::{admm_solve, AdmmConfig, AdmmStopReason};
use crate::cluster::{cluster_count, ClusterReport};
use crate::dal::{dal_solve, DalConfig, StopReason, TerminalObjective};
use crate::dynamics::{ControlBounds, ControlPair, ControlTrajectory, StateTrajectory};
use crate::error::Error;
use crate::grid::ImageGrid;
use crate::kernel::KernelKind;
use crate::pgm::{read_pgm, write_pgm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Dal,
    Admm,
}

/// A fully resolved run request. [`RunConfig::new`] fills in the
/// reference defaults; callers override fields as needed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub solver: SolverKind,
    pub alpha: f64,
    pub rho: f64,
    pub gamma: f64,
    /// Time horizon `T`; `T / dt` must be a whole number of steps.
    pub horizon: f64,
    pub dt: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_init: f64,
    pub eta: f64,
    /// Descent iteration budget (the inner budget for the splitting solver).
    pub max_iters: usize,
    pub max_outer: usize,
    pub kernel: KernelKind,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    pub cluster_gap: f64,
}

impl RunConfig {
    pub fn new(input: PathBuf, out_dir: PathBuf, solver: SolverKind, alpha: f64) -> Self {
        Self {
            input,
            out_dir,
            solver,
            alpha,
            rho: 1e-2,
            gamma: 1e-2,
            horizon: 125.0,
            dt: 0.25,
            eps_min: 2.0,
            eps_max: 1100.0,
            eps_init: 57.0,
            eta: 1e-10,
            max_iters: match solver {
                SolverKind::Dal => 500,
                SolverKind::Admm => 50,
            },
            max_outer: 50,
            kernel: KernelKind::StandardWendland,
            threads: 0,
            cluster_gap: 0.1,
        }
    }
}

/// Failures of a run, grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver error: {0}")]
    Solver(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 3,
            RunError::Solver(_) => 4,
        }
    }
}

impl From<Error> for RunError {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidParam { .. } => RunError::Config(err.to_string()),
            other => RunError::Solver(other),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub iterations: usize,
    pub outer_iterations: Option<usize>,
    pub final_cost: f64,
    pub stop_reason: String,
    pub clusters: usize,
}

/// Number of Euler steps, requiring `horizon / dt` to be a whole number.
fn resolve_steps(horizon: f64, dt: f64) -> Result<usize, RunError> {
    if !(dt.is_finite() && dt > 0.0 && horizon.is_finite() && horizon > 0.0) {
        return Err(RunError::Config(format!(
            "horizon and dt must be positive, got T={horizon}, dt={dt}"
        )));
    }
    let ratio = horizon / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) || rounded < 1.0 {
        return Err(RunError::Config(format!(
            "dt={dt} does not divide the horizon T={horizon} into whole steps"
        )));
    }
    Ok(rounded as usize)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct SolveOutput {
    state: StateTrajectory,
    control: ControlTrajectory,
    cost_rows: String,
    iterations: usize,
    outer_iterations: Option<usize>,
    final_cost: f64,
    stop_reason: String,
}

fn solve(img: &ImageGrid, cfg: &RunConfig, steps: usize) -> Result<SolveOutput, RunError> {
    let bounds = ControlBounds::new(cfg.eps_min, cfg.eps_max, cfg.eps_min, cfg.eps_max)?;
    let eps_init = ControlPair::new(cfg.eps_init, cfg.eps_init)?;
    if !bounds.contains(&eps_init) {
        return Err(RunError::Config(format!(
            "eps_init={} lies outside [{}, {}]",
            cfg.eps_init, cfg.eps_min, cfg.eps_max
        )));
    }
    let mut inner = DalConfig::with_alpha(cfg.alpha);
    inner.eta = cfg.eta;
    inner.max_iters = cfg.max_iters;
    inner.bounds = bounds;
    inner.eps_init = eps_init;
    inner.dt = cfg.dt;
    inner.steps = steps;
    inner.kernel = cfg.kernel;

    match cfg.solver {
        SolverKind::Dal => {
            let report = dal_solve(img, &inner, &TerminalObjective::Quadratic)?;
            let mut rows = String::from("iteration,cost\n");
            for (k, cost) in report.cost_history.iter().enumerate() {
                let _ = writeln!(rows, "{k},{}", fmt_f64(*cost));
            }
            Ok(SolveOutput {
                iterations: report.iterations,
                outer_iterations: None,
                final_cost: *report.cost_history.last().expect("history is non-empty"),
                stop_reason: match report.stop_reason {
                    StopReason::Stationarity => "stationarity".into(),
                    StopReason::MaxIters => "max_iters".into(),
                },
                cost_rows: rows,
                state: report.final_state,
                control: report.final_control,
            })
        }
        SolverKind::Admm => {
            let mut admm = AdmmConfig::with_alpha(cfg.alpha);
            admm.rho = cfg.rho;
            admm.gamma = cfg.gamma;
            admm.max_outer = cfg.max_outer;
            admm.inner = inner;
            let report = admm_solve(img, &admm)?;
            let mut rows = String::from("iteration,cost,primal_residual\n");
            for (k, (cost, residual)) in report
                .objective_history
                .iter()
                .zip(&report.primal_residual_history)
                .enumerate()
            {
                let _ = writeln!(rows, "{},{},{}", k + 1, fmt_f64(*cost), fmt_f64(*residual));
            }
            Ok(SolveOutput {
                iterations: report.inner_iterations.iter().sum(),
                outer_iterations: Some(report.outer_iterations),
                final_cost: report
                    .objective_history
                    .last()
                    .copied()
                    .unwrap_or(f64::NAN),
                stop_reason: match report.stop_reason {
                    AdmmStopReason::PrimalResidual => "primal_residual".into(),
                    AdmmStopReason::MaxOuter => "max_outer".into(),
                },
                cost_rows: rows,
                state: report.final_state,
                control: report.final_control,
            })
        }
    }
}

fn controls_csv(ctrl: &ControlTrajectory) -> String {
    let mut rows = String::from("t,eps_x,eps_c\n");
    for (m, pair) in ctrl.pairs().iter().enumerate() {
        let _ = writeln!(
            rows,
            "{},{},{}",
            fmt_f64(m as f64 * ctrl.dt()),
            fmt_f64(pair.eps_x),
            fmt_f64(pair.eps_c)
        );
    }
    rows
}

fn pixels_csv(img: &ImageGrid, state: &StateTrajectory) -> String {
    let geo = img.geometry();
    let (w, h) = (img.width(), img.height());
    let final_field = state.terminal();
    let mut rows = String::from("x,y,c_initial,c_final\n");
    for j in 0..h {
        for i in 0..w {
            let _ = writeln!(
                rows,
                "{},{},{},{}",
                fmt_f64(i as f64 * geo.hx),
                fmt_f64(j as f64 * geo.hy),
                fmt_f64(img.get(i, j)),
                fmt_f64(final_field.get(i, j))
            );
        }
    }
    rows
}

fn clusters_txt(report: &ClusterReport) -> String {
    let mut out = format!("count: {}\n", report.count());
    for (k, cluster) in report.clusters().iter().enumerate() {
        let _ = writeln!(
            out,
            "cluster {}: mean={} count={}",
            k + 1,
            fmt_f64(cluster.mean),
            cluster.count
        );
    }
    out
}

fn write_file(dir: &std::path::Path, name: &str, bytes: &[u8]) -> Result<(), RunError> {
    std::fs::write(dir.join(name), bytes)
        .map_err(|e| RunError::Io(format!("writing {name}: {e}")))
}

/// Executes a run and emits all artifacts. Prints a one-line summary.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let steps = resolve_steps(cfg.horizon, cfg.dt)?;
    if !(cfg.cluster_gap.is_finite() && cfg.cluster_gap > 0.0) {
        return Err(RunError::Config(format!(
            "cluster gap must be positive, got {}",
            cfg.cluster_gap
        )));
    }

    let bytes = std::fs::read(&cfg.input)
        .map_err(|e| RunError::Io(format!("reading {}: {e}", cfg.input.display())))?;
    let img =
        read_pgm(&bytes).map_err(|e| RunError::Io(format!("{}: {e}", cfg.input.display())))?;

    let output = if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
        pool.install(|| solve(&img, cfg, steps))?
    } else {
        solve(&img, cfg, steps)?
    };

    let clusters = cluster_count(output.state.terminal(), cfg.cluster_gap)?;

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| RunError::Io(format!("creating {}: {e}", cfg.out_dir.display())))?;
    let final_img = output.state.terminal().to_image_clamped();
    write_file(&cfg.out_dir, "final.pgm", &write_pgm(&final_img))?;
    write_file(&cfg.out_dir, "controls.csv", controls_csv(&output.control).as_bytes())?;
    write_file(&cfg.out_dir, "cost_history.csv", output.cost_rows.as_bytes())?;
    write_file(&cfg.out_dir, "pixels.csv", pixels_csv(&img, &output.state).as_bytes())?;
    write_file(&cfg.out_dir, "clusters.txt", clusters_txt(&clusters).as_bytes())?;

    let summary = RunSummary {
        iterations: output.iterations,
        outer_iterations: output.outer_iterations,
        final_cost: output.final_cost,
        stop_reason: output.stop_reason,
        clusters: clusters.count(),
    };
    match summary.outer_iterations {
        Some(outer) => println!(
            "admm: {} outer / {} inner iterations, cost {:.6e}, {} clusters, stop: {} -> {}",
            outer,
            summary.iterations,
            summary.final_cost,
            summary.clusters,
            summary.stop_reason,
            cfg.out_dir.display()
        ),
        None => println!(
            "dal: {} iterations, cost {:.6e}, {} clusters, stop: {} -> {}",
            summary.iterations,
            summary.final_cost,
            summary.clusters,
            summary.stop_reason,
            cfg.out_dir.display()
        ),
    }
    Ok(summary)
}
