//! Backward adjoint pass and the reduced control gradient.
//!
//! The adjoint recursion is the exact transpose of the linearised Euler
//! recursion (discretise-then-optimise), so the assembled gradient is the
//! derivative of the discrete reduced cost up to rounding, and finite
//! difference checks pass at solver tolerance rather than only as
//! `dt -> 0`. For the same reason, the terminal conditions below build
//! their Laplacian as `divergence(gradient(.))` — the exact adjoint pair
//! from [`crate::diffops`] — rather than the reflected 5-point stencil;
//! the two agree away from the boundary.

use crate::diffops::{divergence, gradient};
use crate::dynamics::{
    control_sensitivities, jacobian_vector_product, ControlTrajectory, StateTrajectory,
};
use crate::error::{Error, Result};
use crate::grid::{GridGeometry, ImageGrid, ScalarField, VectorField};
use crate::kernel::KernelKind;

/// The adjoint state at every time node (`M + 1` fields, index `M`
/// holding the terminal condition).
#[derive(Debug, Clone)]
pub struct AdjointTrajectory {
    fields: Vec<ScalarField>,
}

impl AdjointTrajectory {
    pub fn steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn node(&self, m: usize) -> &ScalarField {
        &self.fields[m]
    }

    pub fn initial(&self) -> &ScalarField {
        &self.fields[0]
    }

    pub fn terminal(&self) -> &ScalarField {
        self.fields.last().expect("adjoint has at least one node")
    }
}

/// Gradient of the reduced cost with respect to the per-step control
/// values, one `(d/d eps_x, d/d eps_c)` pair per step.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGradient {
    entries: Vec<(f64, f64)>,
}

impl ControlGradient {
    pub fn from_entries(entries: Vec<(f64, f64)>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Squared Euclidean norm over all steps and both components.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(x, c)| x * x + c * c).sum()
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParam {
            name,
            requirement: "finite and positive",
            value,
        });
    }
    Ok(())
}

/// Terminal adjoint for the smooth objective:
/// `-lap(c_T) + alpha * (c_T - I)` with the adjoint-consistent Laplacian.
pub fn terminal_quadratic(c_t: &ScalarField, img: &ImageGrid, alpha: f64) -> Result<ScalarField> {
    require_positive("alpha", alpha)?;
    assert_eq!(c_t.len(), img.len(), "field/image shape mismatch");
    let geo = GridGeometry::new(c_t.width(), c_t.height());
    let lap = divergence(&gradient(c_t, &geo), &geo);
    let values = c_t
        .values()
        .iter()
        .zip(img.values())
        .zip(lap.values())
        .map(|((c, i), l)| alpha * (c - i) - l)
        .collect();
    Ok(ScalarField::from_values(c_t.width(), c_t.height(), values))
}

/// Terminal adjoint for the splitting objective at fixed `(v, mu)`:
/// `-rho * lap(c_T) + div(mu + rho v) + alpha * (c_T - I)`.
///
/// With `v = mu = 0` and `rho = 1` this coincides with
/// [`terminal_quadratic`]. It is the exact derivative of the
/// completed-square integrand with respect to the colour field.
pub fn terminal_tv(
    c_t: &ScalarField,
    img: &ImageGrid,
    v: &VectorField,
    mu: &VectorField,
    alpha: f64,
    rho: f64,
) -> Result<ScalarField> {
    require_positive("alpha", alpha)?;
    require_positive("rho", rho)?;
    assert_eq!(c_t.len(), img.len(), "field/image shape mismatch");
    assert!(v.x.same_shape(c_t) && mu.x.same_shape(c_t), "dual shape mismatch");
    let geo = GridGeometry::new(c_t.width(), c_t.height());
    let lap = divergence(&gradient(c_t, &geo), &geo);
    let dual_div = divergence(&mu.axpy(rho, v), &geo);
    let values = c_t
        .values()
        .iter()
        .zip(img.values())
        .zip(lap.values().iter().zip(dual_div.values()))
        .map(|((c, i), (l, d))| alpha * (c - i) - rho * l + d)
        .collect();
    Ok(ScalarField::from_values(c_t.width(), c_t.height(), values))
}

/// Propagates the terminal adjoint backward through the stored forward
/// trajectory: `lam^m = lam^{m+1} + dt * J(c^m)^T lam^{m+1}`.
pub fn integrate_backward(
    states: &StateTrajectory,
    ctrl: &ControlTrajectory,
    lambda_t: ScalarField,
    kind: KernelKind,
) -> Result<AdjointTrajectory> {
    if states.steps() != ctrl.steps() {
        return Err(Error::LengthMismatch(format!(
            "state trajectory has {} steps, control has {}",
            states.steps(),
            ctrl.steps()
        )));
    }
    if !lambda_t.same_shape(states.terminal()) {
        return Err(Error::LengthMismatch(
            "terminal adjoint shape differs from the state".into(),
        ));
    }
    let geo = states.geometry();
    let steps = ctrl.steps();
    let mut current = lambda_t;
    let mut fields = Vec::with_capacity(steps + 1);
    fields.push(current.clone());
    for m in (0..steps).rev() {
        let jvp = jacobian_vector_product(states.node(m), &geo, &ctrl.pairs()[m], &current, kind);
        current = current.axpy(ctrl.dt(), &jvp);
        fields.push(current.clone());
    }
    fields.reverse();
    Ok(AdjointTrajectory { fields })
}

/// Assembles the reduced-cost gradient: for each step,
/// `dt * (<lam^{m+1}, dF/d eps_x (c^m)>, <lam^{m+1}, dF/d eps_c (c^m)>)`.
///
/// The pairing of `lam^{m+1}` with `c^m` and the step factor come out of
/// the discrete chain rule for the Euler recursion; the result matches
/// central finite differences of the reduced cost componentwise.
pub fn reduced_gradient(
    states: &StateTrajectory,
    adjoints: &AdjointTrajectory,
    ctrl: &ControlTrajectory,
    kind: KernelKind,
) -> Result<ControlGradient> {
    if states.steps() != ctrl.steps() || adjoints.steps() != ctrl.steps() {
        return Err(Error::LengthMismatch(format!(
            "states/adjoints/control step counts differ: {}/{}/{}",
            states.steps(),
            adjoints.steps(),
            ctrl.steps()
        )));
    }
    let geo = states.geometry();
    let dt = ctrl.dt();
    let mut entries = Vec::with_capacity(ctrl.steps());
    for (m, eps) in ctrl.pairs().iter().enumerate() {
        let (sens_x, sens_c) = control_sensitivities(states.node(m), &geo, eps, kind);
        let lam = adjoints.node(m + 1);
        entries.push((dt * lam.dot(&sens_x), dt * lam.dot(&sens_c)));
    }
    Ok(ControlGradient { entries })
}
