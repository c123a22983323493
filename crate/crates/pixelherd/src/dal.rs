//! Direct-adjoint looping: projected gradient descent on the reduced
//! cost with a two-way Armijo backtracking line search.
//!
//! One iteration integrates the dynamics forward, propagates the adjoint
//! backward from the terminal condition, assembles the control gradient,
//! and takes a projected step along the negative gradient whose length is
//! chosen by the line search. The search is "two-way": if the previous
//! step length fails the sufficient-decrease test it backtracks, and if
//! it passes it keeps growing until the test first fails, returning the
//! last passing step.

use crate::adjoint::{
    integrate_backward, reduced_gradient, terminal_quadratic, terminal_tv, ControlGradient,
};
use crate::cost::{cost_admm_objective, cost_quadratic};
use crate::dynamics::{
    integrate_forward, integrate_terminal, ControlBounds, ControlPair, ControlTrajectory,
    StateTrajectory,
};
use crate::error::{Error, Result};
use crate::grid::{ImageGrid, ScalarField, VectorField};
use crate::kernel::KernelKind;

/// Hard cap on consecutive shrink steps before the search gives up.
const MAX_SHRINKS: usize = 60;
/// Hard ceiling on step growth, as a multiple of the initial step.
const MAX_GROWTH: f64 = (1u64 << 60) as f64;

/// Which terminal functional drives the descent.
#[derive(Debug, Clone, Copy)]
pub enum TerminalObjective<'a> {
    /// The smooth gradient-penalty objective.
    Quadratic,
    /// The completed-square splitting objective at fixed `(v, mu)`.
    TvAugmented {
        v: &'a VectorField,
        mu: &'a VectorField,
        rho: f64,
    },
}

impl TerminalObjective<'_> {
    pub(crate) fn cost(&self, c_t: &ScalarField, img: &ImageGrid, alpha: f64) -> Result<f64> {
        match self {
            TerminalObjective::Quadratic => Ok(cost_quadratic(c_t, img, alpha)?.total),
            TerminalObjective::TvAugmented { v, mu, rho } => {
                Ok(cost_admm_objective(c_t, v, mu, img, alpha, *rho)?.total)
            }
        }
    }

    fn terminal_adjoint(&self, c_t: &ScalarField, img: &ImageGrid, alpha: f64) -> Result<ScalarField> {
        match self {
            TerminalObjective::Quadratic => terminal_quadratic(c_t, img, alpha),
            TerminalObjective::TvAugmented { v, mu, rho } => {
                terminal_tv(c_t, img, v, mu, alpha, *rho)
            }
        }
    }
}

/// Solver configuration. The defaults follow the reference experiments:
/// unit initial step, halving backtracks, a `1e-4` sufficient-decrease
/// slope, stationarity tolerance `1e-10`, the wide `[2, 1100]^2` control
/// box and a constant initial control of 57 on both axes.
#[derive(Debug, Clone)]
pub struct DalConfig {
    pub sigma0: f64,
    /// Backtracking factor `b` in `(0, 1)`.
    pub backtrack: f64,
    /// Sufficient-decrease constant `c` in `(0, 1)`.
    pub sufficient_decrease: f64,
    /// Relative stationarity tolerance on the cost.
    pub eta: f64,
    pub max_iters: usize,
    pub bounds: ControlBounds,
    pub eps_init: ControlPair,
    pub alpha: f64,
    pub dt: f64,
    pub steps: usize,
    pub kernel: KernelKind,
}

impl DalConfig {
    /// Paper-style defaults over the full horizon (`T = 125`, `dt = 0.25`).
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            sigma0: 1.0,
            backtrack: 0.5,
            sufficient_decrease: 1e-4,
            eta: 1e-10,
            max_iters: 500,
            bounds: ControlBounds::wide(),
            eps_init: ControlPair {
                eps_x: 57.0,
                eps_c: 57.0,
            },
            alpha,
            dt: 0.25,
            steps: 500,
            kernel: KernelKind::StandardWendland,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 5] = [
            ("sigma0", self.sigma0, self.sigma0.is_finite() && self.sigma0 > 0.0),
            ("b", self.backtrack, self.backtrack > 0.0 && self.backtrack < 1.0),
            (
                "c",
                self.sufficient_decrease,
                self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0,
            ),
            ("eta", self.eta, self.eta.is_finite() && self.eta > 0.0),
            ("alpha", self.alpha, self.alpha.is_finite() && self.alpha > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParam {
                    name,
                    requirement: "within its documented range",
                    value,
                });
            }
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidParam {
                name: "dt",
                requirement: "finite and positive",
                value: self.dt,
            });
        }
        if !self.bounds.contains(&self.eps_init) {
            return Err(Error::InvalidParam {
                name: "eps_init",
                requirement: "inside the control bounds",
                value: self.eps_init.eps_x,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Stationarity,
    MaxIters,
}

/// Everything a run leaves behind.
#[derive(Debug, Clone)]
pub struct DalReport {
    pub iterations: usize,
    /// Objective after each accepted iterate, starting with the initial one.
    pub cost_history: Vec<f64>,
    pub final_control: ControlTrajectory,
    pub final_state: StateTrajectory,
    /// Objective evaluations spent by each line search.
    pub line_search_counts: Vec<usize>,
    pub stop_reason: StopReason,
    /// The shrink phase hit its cap at least once (treated as stationarity).
    pub line_search_failed: bool,
    /// Sign violations of the final gradient on the active bounds,
    /// at tolerance 1e-8. Diagnostic only.
    pub bound_violations: usize,
}

/// Componentwise clamp of every control pair into the box. Idempotent.
pub fn project_controls(traj: &ControlTrajectory, bounds: &ControlBounds) -> ControlTrajectory {
    let mut out = traj.clone();
    for pair in out.pairs_mut() {
        *pair = bounds.clamp(pair);
    }
    out
}

/// The control-to-cost map: integrate forward, evaluate the terminal
/// functional. Divergence of the flow is propagated.
pub fn reduced_cost(
    img: &ImageGrid,
    ctrl: &ControlTrajectory,
    kind: KernelKind,
    alpha: f64,
    objective: &TerminalObjective<'_>,
) -> Result<f64> {
    let c_t = integrate_terminal(img, ctrl, kind)?;
    objective.cost(&c_t, img, alpha)
}

/// Result of one two-way Armijo search.
#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    /// Accepted step length (the next search starts here).
    pub sigma: f64,
    /// Projected candidate at the accepted step.
    pub control: ControlTrajectory,
    /// Objective value at the accepted candidate.
    pub cost: f64,
    /// Number of objective evaluations spent.
    pub evaluations: usize,
    /// The shrink phase exhausted its cap without a passing step.
    pub failed: bool,
}

fn step_candidate(
    eps: &ControlTrajectory,
    grad: &ControlGradient,
    tau: f64,
    bounds: &ControlBounds,
) -> ControlTrajectory {
    let mut out = eps.clone();
    for (pair, (gx, gc)) in out.pairs_mut().iter_mut().zip(grad.entries()) {
        pair.eps_x -= tau * gx;
        pair.eps_c -= tau * gc;
        *pair = bounds.clamp(pair);
    }
    out
}

/// Two-way Armijo backtracking along the projected negative gradient.
///
/// Tests `J(P(eps - tau G)) <= J(eps) - c tau |G|^2`; shrinks `tau` by `b`
/// until the test passes (up to a hard cap, reported via `failed`), or
/// grows it by `1/b` while the test keeps passing and returns the last
/// passing step. A trial whose forward integration diverges counts as a
/// failed test.
pub fn armijo_two_way(
    eps: &ControlTrajectory,
    grad: &ControlGradient,
    sigma_prev: f64,
    cost_current: f64,
    cfg: &DalConfig,
    objective: &mut dyn FnMut(&ControlTrajectory) -> Result<f64>,
) -> Result<LineSearchOutcome> {
    let gnorm_sq = grad.norm_sq();
    if gnorm_sq == 0.0 {
        return Ok(LineSearchOutcome {
            sigma: sigma_prev,
            control: eps.clone(),
            cost: cost_current,
            evaluations: 0,
            failed: false,
        });
    }

    let mut evaluations = 0usize;
    // Ok(None) marks a diverged trial.
    let mut try_step = |tau: f64| -> Result<Option<(ControlTrajectory, f64)>> {
        let candidate = step_candidate(eps, grad, tau, &cfg.bounds);
        evaluations += 1;
        match objective(&candidate) {
            Ok(cost) => Ok(Some((candidate, cost))),
            Err(Error::Diverged { .. }) => Ok(None),
            Err(other) => Err(other),
        }
    };
    let passes =
        |cost: f64, tau: f64| cost <= cost_current - cfg.sufficient_decrease * tau * gnorm_sq;

    let mut tau = sigma_prev;
    let first = try_step(tau)?;
    let first_passes = matches!(&first, Some((_, cost)) if passes(*cost, tau));

    if !first_passes {
        for _ in 0..MAX_SHRINKS {
            tau *= cfg.backtrack;
            if let Some((candidate, cost)) = try_step(tau)? {
                if passes(cost, tau) {
                    return Ok(LineSearchOutcome {
                        sigma: tau,
                        control: candidate,
                        cost,
                        evaluations,
                        failed: false,
                    });
                }
            }
        }
        return Ok(LineSearchOutcome {
            sigma: tau,
            control: eps.clone(),
            cost: cost_current,
            evaluations,
            failed: true,
        });
    }

    let (mut best_control, mut best_cost) = first.expect("passing trial exists");
    loop {
        let next_tau = tau / cfg.backtrack;
        if next_tau > cfg.sigma0 * MAX_GROWTH {
            break;
        }
        match try_step(next_tau)? {
            Some((candidate, cost)) if passes(cost, next_tau) => {
                tau = next_tau;
                best_control = candidate;
                best_cost = cost;
            }
            _ => break,
        }
    }
    Ok(LineSearchOutcome {
        sigma: tau,
        control: best_control,
        cost: best_cost,
        evaluations,
        failed: false,
    })
}

fn count_bound_violations(
    ctrl: &ControlTrajectory,
    grad: &ControlGradient,
    bounds: &ControlBounds,
) -> usize {
    const TOL: f64 = 1e-8;
    let mut violations = 0;
    for (pair, (gx, gc)) in ctrl.pairs().iter().zip(grad.entries()) {
        for (value, g, lo, hi) in [
            (pair.eps_x, *gx, bounds.eps_x_min, bounds.eps_x_max),
            (pair.eps_c, *gc, bounds.eps_c_min, bounds.eps_c_max),
        ] {
            if value <= lo && g < -TOL {
                violations += 1;
            }
            if value >= hi && g > TOL {
                violations += 1;
            }
        }
    }
    violations
}

/// Runs the full descent loop until the relative cost change drops below
/// `eta` (absolute change when the previous cost is zero) or the
/// iteration budget runs out.
pub fn dal_solve(
    img: &ImageGrid,
    cfg: &DalConfig,
    objective: &TerminalObjective<'_>,
) -> Result<DalReport> {
    let initial = ControlTrajectory::constant(cfg.dt, cfg.steps, cfg.eps_init)?;
    dal_solve_from(img, cfg, objective, initial)
}

/// Same loop, warm-started from an explicit control trajectory (used by
/// the outer splitting iteration).
pub fn dal_solve_from(
    img: &ImageGrid,
    cfg: &DalConfig,
    objective: &TerminalObjective<'_>,
    initial: ControlTrajectory,
) -> Result<DalReport> {
    cfg.validate()?;
    let mut ctrl = project_controls(&initial, &cfg.bounds);
    let area = img.geometry().cell_area();
    let mut states = integrate_forward(img, &ctrl, cfg.kernel)?;
    let mut cost = objective.cost(states.terminal(), img, cfg.alpha)?;

    let mut cost_history = vec![cost];
    let mut line_search_counts = Vec::new();
    let mut sigma = cfg.sigma0;
    let mut iterations = 0;
    let mut stop_reason = StopReason::MaxIters;
    let mut line_search_failed = false;
    let mut last_grad: Option<ControlGradient> = None;

    for _ in 0..cfg.max_iters {
        iterations += 1;

        let mut lambda_t = objective.terminal_adjoint(states.terminal(), img, cfg.alpha)?;
        // The discrete objective carries the quadrature weight; so must
        // its derivative.
        for v in lambda_t.values_mut() {
            *v *= area;
        }
        let adjoints = integrate_backward(&states, &ctrl, lambda_t, cfg.kernel)?;
        let grad = reduced_gradient(&states, &adjoints, &ctrl, cfg.kernel)?;

        let outcome = armijo_two_way(&ctrl, &grad, sigma, cost, cfg, &mut |candidate| {
            reduced_cost(img, candidate, cfg.kernel, cfg.alpha, objective)
        })?;
        line_search_counts.push(outcome.evaluations);
        last_grad = Some(grad);

        if outcome.failed {
            line_search_failed = true;
            stop_reason = StopReason::Stationarity;
            break;
        }

        sigma = outcome.sigma;
        ctrl = outcome.control;
        states = integrate_forward(img, &ctrl, cfg.kernel)?;
        let new_cost = outcome.cost;
        cost_history.push(new_cost);

        let change = (new_cost - cost).abs();
        let stationary = if cost == 0.0 {
            change < cfg.eta
        } else {
            change / cost.abs() < cfg.eta
        };
        cost = new_cost;
        if stationary {
            stop_reason = StopReason::Stationarity;
            break;
        }
    }

    let bound_violations = match &last_grad {
        Some(grad) => count_bound_violations(&ctrl, grad, &cfg.bounds),
        None => 0,
    };

    Ok(DalReport {
        iterations,
        cost_history,
        final_control: ctrl,
        final_state: states,
        line_search_counts,
        stop_reason,
        line_search_failed,
        bound_violations,
    })
}
