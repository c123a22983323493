//! Alternating minimisation for the total-variation objective.
//!
//! The non-smooth TV term is split off through an auxiliary gradient
//! surrogate `v` tied to `grad c(T)` by a multiplier `mu`. Each outer
//! iteration then alternates three cheap blocks:
//!
//! 1. descend in the control with the inner direct-adjoint loop, at
//!    fixed `(v, mu)` (the completed-square objective is smooth);
//! 2. minimise in `v` exactly, pointwise, via the shrinkage formula;
//! 3. one gradient-ascent step on the multiplier.
//!
//! The loop stops when the primal residual `|v - grad c(T)|` falls below
//! a tolerance or the outer budget runs out.

use crate::dal::{dal_solve_from, DalConfig, DalReport, TerminalObjective};
use crate::diffops::gradient;
use crate::dynamics::{ControlTrajectory, StateTrajectory};
use crate::error::{Error, Result};
use crate::grid::{GridGeometry, ImageGrid, ScalarField, VectorField};

/// Outer-loop configuration. `rho` is the splitting weight, `gamma` the
/// dual ascent step; both default to `1e-2` in [`AdmmConfig::with_alpha`].
#[derive(Debug, Clone)]
pub struct AdmmConfig {
    pub rho: f64,
    pub gamma: f64,
    /// Stop once `|v - grad c(T)|_2` drops below this.
    pub primal_tol: f64,
    pub max_outer: usize,
    pub inner: DalConfig,
}

impl AdmmConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        let mut inner = DalConfig::with_alpha(alpha);
        // Exact inner convergence is wasted work in early outer rounds.
        inner.max_iters = 50;
        Self {
            rho: 1e-2,
            gamma: 1e-2,
            primal_tol: 1e-3,
            max_outer: 50,
            inner,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rho", self.rho),
            ("gamma", self.gamma),
            ("primal_tol", self.primal_tol),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParam {
                    name,
                    requirement: "finite and positive",
                    value,
                });
            }
        }
        self.inner.validate()
    }
}

/// The auxiliary gradient surrogate and its multiplier.
#[derive(Debug, Clone)]
pub struct DualState {
    pub v: VectorField,
    pub mu: VectorField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmmStopReason {
    PrimalResidual,
    MaxOuter,
}

#[derive(Debug, Clone)]
pub struct AdmmReport {
    pub outer_iterations: usize,
    /// `|v - grad c(T)|_2` after each outer iteration.
    pub primal_residual_history: Vec<f64>,
    /// Completed-square objective at `(eps, v)` of each outer iteration,
    /// evaluated with the multiplier the inner solve was run against.
    pub objective_history: Vec<f64>,
    pub final_control: ControlTrajectory,
    pub final_state: StateTrajectory,
    pub final_dual: DualState,
    pub stop_reason: AdmmStopReason,
    /// Iteration count of each inner solve.
    pub inner_iterations: Vec<usize>,
    pub v_updates: usize,
    pub mu_updates: usize,
}

/// Pointwise vector soft-threshold: the exact minimiser of
/// `rho/2 |v - a|^2 + |v|`. Zero for `|a| <= 1/rho`, otherwise `a`
/// contracted radially by `1/rho`.
pub fn shrink(a: [f64; 2], rho: f64) -> [f64; 2] {
    let norm = (a[0] * a[0] + a[1] * a[1]).sqrt();
    if norm <= 1.0 / rho {
        [0.0, 0.0]
    } else {
        let scale = (norm - 1.0 / rho) / norm;
        [scale * a[0], scale * a[1]]
    }
}

/// Exact `v`-block minimiser: per-pixel shrinkage of `grad c(T) - mu/rho`.
pub fn update_v(c_t: &ScalarField, mu: &VectorField, rho: f64, geo: &GridGeometry) -> VectorField {
    let g = gradient(c_t, geo);
    let (w, h) = (c_t.width(), c_t.height());
    let mut out = VectorField::zeros(w, h);
    for idx in 0..c_t.len() {
        let a = [
            g.x.values()[idx] - mu.x.values()[idx] / rho,
            g.y.values()[idx] - mu.y.values()[idx] / rho,
        ];
        let s = shrink(a, rho);
        out.x.values_mut()[idx] = s[0];
        out.y.values_mut()[idx] = s[1];
    }
    out
}

/// One dual ascent step: `mu + gamma * (v - grad c(T))`.
pub fn update_mu(mu: &VectorField, v: &VectorField, grad_ct: &VectorField, gamma: f64) -> VectorField {
    let residual = v.axpy(-1.0, grad_ct);
    mu.axpy(gamma, &residual)
}

fn primal_residual(v: &VectorField, grad_ct: &VectorField) -> f64 {
    v.axpy(-1.0, grad_ct).norm()
}

/// Runs the outer splitting loop. The inner solver is warm-started from
/// the previous outer iterate's control.
pub fn admm_solve(img: &ImageGrid, cfg: &AdmmConfig) -> Result<AdmmReport> {
    cfg.validate()?;
    let geo = img.geometry();
    let (w, h) = (img.width(), img.height());

    // Initialisation: one forward pass at the initial control, a zero
    // multiplier, and the corresponding exact v.
    let mut ctrl = ControlTrajectory::constant(cfg.inner.dt, cfg.inner.steps, cfg.inner.eps_init)?;
    let initial_states = crate::dynamics::integrate_forward(img, &ctrl, cfg.inner.kernel)?;
    let mut mu = VectorField::zeros(w, h);
    let mut v = update_v(initial_states.terminal(), &mu, cfg.rho, &geo);
    let mut states = initial_states;

    let mut primal_residual_history = Vec::new();
    let mut objective_history = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut v_updates = 0usize;
    let mut mu_updates = 0usize;
    let mut stop_reason = AdmmStopReason::MaxOuter;
    let mut outer_iterations = 0usize;

    for _ in 0..cfg.max_outer {
        outer_iterations += 1;

        let inner_report: DalReport = {
            let objective = TerminalObjective::TvAugmented {
                v: &v,
                mu: &mu,
                rho: cfg.rho,
            };
            dal_solve_from(img, &cfg.inner, &objective, ctrl.clone())?
        };
        inner_iterations.push(inner_report.iterations);
        ctrl = inner_report.final_control;
        states = inner_report.final_state;

        v = update_v(states.terminal(), &mu, cfg.rho, &geo);
        v_updates += 1;

        let objective = TerminalObjective::TvAugmented {
            v: &v,
            mu: &mu,
            rho: cfg.rho,
        }
        .cost(states.terminal(), img, cfg.inner.alpha)?;
        objective_history.push(objective);

        let grad_ct = gradient(states.terminal(), &geo);
        mu = update_mu(&mu, &v, &grad_ct, cfg.gamma);
        mu_updates += 1;

        let residual = primal_residual(&v, &grad_ct);
        primal_residual_history.push(residual);
        if residual <= cfg.primal_tol {
            stop_reason = AdmmStopReason::PrimalResidual;
            break;
        }
    }

    Ok(AdmmReport {
        outer_iterations,
        primal_residual_history,
        objective_history,
        final_control: ctrl,
        final_state: states,
        final_dual: DualState { v, mu },
        stop_reason,
        inner_iterations,
        v_updates,
        mu_updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost_admm_objective;

    fn lcg_field(w: usize, h: usize, seed: &mut u64) -> ScalarField {
        ScalarField::from_fn(w, h, |_, _| {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (*seed >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn shrink_zero_below_threshold() {
        assert_eq!(shrink([0.3, 0.4], 2.0), [0.0, 0.0]); // |a| = 0.5 = 1/rho
        assert_eq!(shrink([0.0, 0.0], 5.0), [0.0, 0.0]);
    }

    #[test]
    fn shrink_contracts_radially() {
        let out = shrink([2.0, 0.0], 1.0);
        assert!((out[0] - 1.0).abs() < 1e-15);
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn shrink_is_the_pointwise_minimiser() {
        // Coarse-to-fine grid search over the convex objective
        // f(v) = rho/2 |v - a|^2 + |v|.
        let f = |v: [f64; 2], a: [f64; 2], rho: f64| {
            let d = [(v[0] - a[0]), (v[1] - a[1])];
            0.5 * rho * (d[0] * d[0] + d[1] * d[1]) + (v[0] * v[0] + v[1] * v[1]).sqrt()
        };
        for &(a, rho) in &[([1.4, -0.7], 2.0), ([-0.2, 0.1], 3.0), ([0.9, 0.9], 1.3)] {
            let s = shrink(a, rho);
            let mut best = [0.0, 0.0];
            let mut best_val = f64::INFINITY;
            let span = 1.6;
            for iy in 0..=64 {
                for ix in 0..=64 {
                    let v = [
                        -span + 2.0 * span * ix as f64 / 64.0,
                        -span + 2.0 * span * iy as f64 / 64.0,
                    ];
                    let val = f(v, a, rho);
                    if val < best_val {
                        best_val = val;
                        best = v;
                    }
                }
            }
            // refine around the coarse winner
            let step = 1e-3;
            let mut refined = best;
            let mut refined_val = best_val;
            let radius = (2.0 * span / 64.0 / step) as i64 + 1;
            for iy in -radius..=radius {
                for ix in -radius..=radius {
                    let v = [best[0] + ix as f64 * step, best[1] + iy as f64 * step];
                    let val = f(v, a, rho);
                    if val < refined_val {
                        refined_val = val;
                        refined = v;
                    }
                }
            }
            let d = ((s[0] - refined[0]).powi(2) + (s[1] - refined[1]).powi(2)).sqrt();
            assert!(d <= 2e-3, "closed form {s:?} vs grid {refined:?} for a={a:?}, rho={rho}");
        }
    }

    #[test]
    fn update_v_on_constant_field_is_zero() {
        let c = ScalarField::from_values(4, 4, vec![0.7; 16]);
        let mu = VectorField::zeros(4, 4);
        let v = update_v(&c, &mu, 0.01, &GridGeometry::new(4, 4));
        assert!(v.x.values().iter().all(|&x| x == 0.0));
        assert!(v.y.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn update_v_approaches_the_gradient_for_large_rho() {
        let mut seed = 60u64;
        let c = lcg_field(5, 5, &mut seed);
        let geo = GridGeometry::new(5, 5);
        let mu = VectorField::zeros(5, 5);
        let rho = 1e6;
        let v = update_v(&c, &mu, rho, &geo);
        let g = gradient(&c, &geo);
        for idx in 0..c.len() {
            let dx = v.x.values()[idx] - g.x.values()[idx];
            let dy = v.y.values()[idx] - g.y.values()[idx];
            assert!((dx * dx + dy * dy).sqrt() <= 1.0 / rho + 1e-12);
        }
    }

    #[test]
    fn update_v_is_zero_when_the_threshold_dominates() {
        let mut seed = 61u64;
        let c = lcg_field(4, 4, &mut seed);
        let mu = VectorField::zeros(4, 4);
        // Gradients on a 4x4 unit grid are at most ~3/hx = 9; 1/rho = 1e3.
        let v = update_v(&c, &mu, 1e-3, &GridGeometry::new(4, 4));
        assert!(v.x.values().iter().all(|&x| x == 0.0));
        assert!(v.y.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn update_mu_examples() {
        let mut seed = 62u64;
        let grad_ct = VectorField::new(lcg_field(3, 3, &mut seed), lcg_field(3, 3, &mut seed));
        let mu = VectorField::new(lcg_field(3, 3, &mut seed), lcg_field(3, 3, &mut seed));
        // Zero residual leaves the multiplier alone.
        let same = update_mu(&mu, &grad_ct, &grad_ct, 0.01);
        for idx in 0..9 {
            assert_eq!(same.x.values()[idx], mu.x.values()[idx]);
            assert_eq!(same.y.values()[idx], mu.y.values()[idx]);
        }

        // Single-pixel hand value.
        let zero = VectorField::zeros(2, 1);
        let mut v = VectorField::zeros(2, 1);
        v.x.values_mut()[0] = 1.0;
        let stepped = update_mu(&zero, &v, &VectorField::zeros(2, 1), 1e-2);
        assert!((stepped.x.values()[0] - 0.01).abs() < 1e-18);
        assert_eq!(stepped.y.values()[0], 0.0);

        // Two equal-residual steps accumulate linearly.
        let twice = update_mu(&stepped, &v, &VectorField::zeros(2, 1), 1e-2);
        assert!((twice.x.values()[0] - 0.02).abs() < 1e-18);
    }

    #[test]
    fn v_update_never_increases_the_objective() {
        let mut seed = 63u64;
        let c = lcg_field(5, 5, &mut seed);
        let img = c.to_image_clamped();
        let geo = GridGeometry::new(5, 5);
        let mu = VectorField::new(lcg_field(5, 5, &mut seed), lcg_field(5, 5, &mut seed));
        let (alpha, rho) = (10.0, 0.5);
        let v_before = VectorField::new(lcg_field(5, 5, &mut seed), lcg_field(5, 5, &mut seed));
        let before = cost_admm_objective(&c, &v_before, &mu, &img, alpha, rho)
            .unwrap()
            .total;
        let v_after = update_v(&c, &mu, rho, &geo);
        let after = cost_admm_objective(&c, &v_after, &mu, &img, alpha, rho)
            .unwrap()
            .total;
        assert!(after <= before + 1e-12, "v-update increased: {before} -> {after}");
    }

    #[test]
    fn uniform_image_converges_in_one_outer_iteration() {
        let img = ImageGrid::constant(6, 6, 0.4).unwrap();
        let mut cfg = AdmmConfig::with_alpha(1000.0);
        cfg.inner.steps = 10;
        let report = admm_solve(&img, &cfg).unwrap();
        assert_eq!(report.outer_iterations, 1);
        assert_eq!(report.stop_reason, AdmmStopReason::PrimalResidual);
        assert_eq!(report.primal_residual_history, vec![0.0]);
    }

    #[test]
    fn single_outer_iteration_accounting() {
        let mut seed = 64u64;
        let img = lcg_field(6, 6, &mut seed).to_image_clamped();
        let mut cfg = AdmmConfig::with_alpha(500.0);
        cfg.inner.steps = 8;
        cfg.inner.max_iters = 3;
        cfg.max_outer = 1;
        let report = admm_solve(&img, &cfg).unwrap();
        assert_eq!(report.outer_iterations, 1);
        assert_eq!(report.inner_iterations.len(), 1);
        assert_eq!(report.v_updates, 1);
        assert_eq!(report.mu_updates, 1);
        assert_eq!(report.primal_residual_history.len(), 1);
        assert_eq!(report.objective_history.len(), 1);
    }

    #[test]
    fn histories_match_the_outer_count_and_stay_finite() {
        let img = ScalarField::from_fn(8, 8, |i, j| {
            let base = if i < 4 { 0.25 } else { 0.75 };
            base + 0.01 * ((i + 2 * j) % 3) as f64
        })
        .to_image_clamped();
        let mut cfg = AdmmConfig::with_alpha(800.0);
        cfg.inner.steps = 12;
        cfg.inner.max_iters = 5;
        cfg.max_outer = 4;
        let report = admm_solve(&img, &cfg).unwrap();
        assert_eq!(report.primal_residual_history.len(), report.outer_iterations);
        assert_eq!(report.objective_history.len(), report.outer_iterations);
        assert!(report.objective_history.iter().all(|v| v.is_finite()));
        assert!(report.primal_residual_history.iter().all(|v| v.is_finite()));
        for pair in report.final_control.pairs() {
            assert!(cfg.inner.bounds.contains(pair));
        }
    }
}
