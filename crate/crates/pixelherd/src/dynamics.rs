//! The pixel-level consensus ODE.
//!
//! Every pixel is an agent with a fixed position on the unit square and a
//! moving intensity. Each agent is pulled toward the intensities of the
//! agents inside an anisotropic interaction neighbourhood whose spatial
//! and tonal radii are set by the control pair `(eps_x, eps_c)`:
//!
//! ```text
//! dc_i/dt = (1/N) * sum_j phi(r_ij) * (c_j - c_i)
//! r_ij    = eps_x/2 * |x_j - x_i|^2 + eps_c/2 * (c_j - c_i)^2
//! ```
//!
//! Because `phi` vanishes for `r >= 1`, a pair can only interact when its
//! squared spatial distance is below `2 / eps_x`. The agents sit on a
//! regular lattice, so that uniform-grid binning collapses to an index
//! window around each destination pixel; everything outside the window
//! contributes an exact zero. All accumulations run over ascending pixel
//! index, which makes the pruned sums bit-identical to the full `O(N^2)`
//! sums and the results independent of the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridGeometry, ImageGrid, ScalarField};
use crate::kernel::{dphi_raw, phi_raw, KernelKind};

/// One value of the control: non-negative spatial and tonal scalings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPair {
    pub eps_x: f64,
    pub eps_c: f64,
}

impl ControlPair {
    pub fn new(eps_x: f64, eps_c: f64) -> Result<Self> {
        for (name, value) in [("eps_x", eps_x), ("eps_c", eps_c)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParam {
                    name,
                    requirement: "finite and non-negative",
                    value,
                });
            }
        }
        Ok(Self { eps_x, eps_c })
    }
}

/// The admissible box `E`: a compact rectangle in the non-negative quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBounds {
    pub eps_x_min: f64,
    pub eps_x_max: f64,
    pub eps_c_min: f64,
    pub eps_c_max: f64,
}

impl ControlBounds {
    pub fn new(eps_x_min: f64, eps_x_max: f64, eps_c_min: f64, eps_c_max: f64) -> Result<Self> {
        for (name, lo, hi) in [
            ("eps_x", eps_x_min, eps_x_max),
            ("eps_c", eps_c_min, eps_c_max),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
                return Err(Error::InvalidParam {
                    name,
                    requirement: "0 <= min <= max, both finite",
                    value: lo,
                });
            }
        }
        Ok(Self {
            eps_x_min,
            eps_x_max,
            eps_c_min,
            eps_c_max,
        })
    }

    /// The `[2, 1100]^2` box used throughout the experiments.
    pub fn wide() -> Self {
        Self {
            eps_x_min: 2.0,
            eps_x_max: 1100.0,
            eps_c_min: 2.0,
            eps_c_max: 1100.0,
        }
    }

    pub fn contains(&self, pair: &ControlPair) -> bool {
        pair.eps_x >= self.eps_x_min
            && pair.eps_x <= self.eps_x_max
            && pair.eps_c >= self.eps_c_min
            && pair.eps_c <= self.eps_c_max
    }

    pub fn clamp(&self, pair: &ControlPair) -> ControlPair {
        ControlPair {
            eps_x: pair.eps_x.clamp(self.eps_x_min, self.eps_x_max),
            eps_c: pair.eps_c.clamp(self.eps_c_min, self.eps_c_max),
        }
    }
}

/// A piecewise-constant control: pair `m` acts on `[m*dt, (m+1)*dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrajectory {
    dt: f64,
    pairs: Vec<ControlPair>,
}

impl ControlTrajectory {
    pub fn new(dt: f64, pairs: Vec<ControlPair>) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParam {
                name: "dt",
                requirement: "finite and positive",
                value: dt,
            });
        }
        Ok(Self { dt, pairs })
    }

    /// A trajectory holding the same pair at every step.
    pub fn constant(dt: f64, steps: usize, pair: ControlPair) -> Result<Self> {
        Self::new(dt, vec![pair; steps])
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[ControlPair] {
        &self.pairs
    }

    pub fn pairs_mut(&mut self) -> &mut [ControlPair] {
        &mut self.pairs
    }
}

/// All intermediate colour fields of a forward integration (`M + 1` nodes,
/// node 0 being the input image). The backward adjoint pass needs every
/// node, so the trajectory is stored densely.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    geometry: GridGeometry,
    fields: Vec<ScalarField>,
}

impl StateTrajectory {
    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Number of Euler steps (one less than the number of stored fields).
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
        self.fields.last().expect("trajectory has at least one node")
    }

    pub fn nodes(&self) -> &[ScalarField] {
        &self.fields
    }
}

/// The anisotropic squared interaction distance between two agents.
pub fn pair_distance(spatial_sq: f64, dc: f64, eps: &ControlPair) -> f64 {
    0.5 * (eps.eps_x * spatial_sq + eps.eps_c * dc * dc)
}

/// Half-width of the index window that contains every pixel a given pixel
/// can interact with: spatial squared distance below `2 / eps_x`. Returns
/// the full grid when the cutoff covers the domain diagonal (including
/// `eps_x = 0`, where the cutoff is infinite).
fn interaction_window(
    eps_x: f64,
    geo: &GridGeometry,
    width: usize,
    height: usize,
) -> (usize, usize) {
    let all = (width - 1, height - 1);
    if eps_x <= 0.0 {
        return all;
    }
    let extent_x = (width - 1) as f64 * geo.hx;
    let extent_y = (height - 1) as f64 * geo.hy;
    let cutoff_sq = 2.0 / eps_x;
    if cutoff_sq >= extent_x * extent_x + extent_y * extent_y {
        return all;
    }
    let cutoff = cutoff_sq.sqrt();
    let ri = ((cutoff / geo.hx).floor() as usize).min(width - 1);
    let rj = ((cutoff / geo.hy).floor() as usize).min(height - 1);
    (ri, rj)
}

/// Runs `per_pixel` for every destination pixel, in parallel over rows,
/// writing results in pixel-index order.
fn map_pixels(
    width: usize,
    height: usize,
    per_pixel: impl Fn(usize, usize) -> f64 + Sync,
) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(j, row)| {
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = per_pixel(i, j);
            }
        });
    out
}

/// Right-hand side of the consensus ODE at the given state and control.
pub fn rhs(c: &ScalarField, geo: &GridGeometry, eps: &ControlPair, kind: KernelKind) -> ScalarField {
    let (w, h) = (c.width(), c.height());
    let n = (w * h) as f64;
    let (ri, rj) = interaction_window(eps.eps_x, geo, w, h);
    let vals = c.values();
    let out = map_pixels(w, h, |i, j| {
        let ci = vals[j * w + i];
        let xi = i as f64 * geo.hx;
        let yi = j as f64 * geo.hy;
        let mut acc = 0.0;
        for jj in j.saturating_sub(rj)..=(j + rj).min(h - 1) {
            let dy = jj as f64 * geo.hy - yi;
            let base = jj * w;
            for ii in i.saturating_sub(ri)..=(i + ri).min(w - 1) {
                let dx = ii as f64 * geo.hx - xi;
                let dc = vals[base + ii] - ci;
                let r = 0.5 * (eps.eps_x * (dx * dx + dy * dy) + eps.eps_c * dc * dc);
                acc += phi_raw(kind, r) * dc;
            }
        }
        acc / n
    });
    ScalarField::from_values(w, h, out)
}

/// Applies the state Jacobian of the right-hand side to a field. The
/// Jacobian is symmetric with zero row sums (the diagonal excludes the
/// vanishing self-interaction term), so this also computes the transpose
/// action needed by the adjoint recursion:
///
/// ```text
/// (J v)_i = (1/N) * sum_{k != i} [phi'(r_ik) eps_c (c_k - c_i)^2 + phi(r_ik)] * (v_k - v_i)
/// ```
pub fn jacobian_vector_product(
    c: &ScalarField,
    geo: &GridGeometry,
    eps: &ControlPair,
    v: &ScalarField,
    kind: KernelKind,
) -> ScalarField {
    assert!(c.same_shape(v), "state/vector shape mismatch");
    let (w, h) = (c.width(), c.height());
    let n = (w * h) as f64;
    let (ri, rj) = interaction_window(eps.eps_x, geo, w, h);
    let cv = c.values();
    let vv = v.values();
    let out = map_pixels(w, h, |i, j| {
        let idx = j * w + i;
        let ci = cv[idx];
        let vi = vv[idx];
        let xi = i as f64 * geo.hx;
        let yi = j as f64 * geo.hy;
        let mut acc = 0.0;
        for jj in j.saturating_sub(rj)..=(j + rj).min(h - 1) {
            let dy = jj as f64 * geo.hy - yi;
            let base = jj * w;
            for ii in i.saturating_sub(ri)..=(i + ri).min(w - 1) {
                let dx = ii as f64 * geo.hx - xi;
                let k = base + ii;
                let dc = cv[k] - ci;
                let r = 0.5 * (eps.eps_x * (dx * dx + dy * dy) + eps.eps_c * dc * dc);
                let weight = dphi_raw(kind, r) * eps.eps_c * dc * dc + phi_raw(kind, r);
                acc += weight * (vv[k] - vi);
            }
        }
        acc / n
    });
    ScalarField::from_values(w, h, out)
}

/// Per-pixel sensitivities of the right-hand side with respect to the two
/// control components:
///
/// ```text
/// dF_i/d eps_x = (1/2N) * sum_j phi'(r_ij) |x_j - x_i|^2 (c_j - c_i)
/// dF_i/d eps_c = (1/2N) * sum_j phi'(r_ij) (c_j - c_i)^3
/// ```
pub fn control_sensitivities(
    c: &ScalarField,
    geo: &GridGeometry,
    eps: &ControlPair,
    kind: KernelKind,
) -> (ScalarField, ScalarField) {
    let (w, h) = (c.width(), c.height());
    let n = (w * h) as f64;
    let (ri, rj) = interaction_window(eps.eps_x, geo, w, h);
    let cv = c.values();
    let mut out_x = vec![0.0; w * h];
    let mut out_c = vec![0.0; w * h];
    out_x
        .par_chunks_mut(w)
        .zip(out_c.par_chunks_mut(w))
        .enumerate()
        .for_each(|(j, (row_x, row_c))| {
            for i in 0..w {
                let ci = cv[j * w + i];
                let xi = i as f64 * geo.hx;
                let yi = j as f64 * geo.hy;
                let mut sx = 0.0;
                let mut sc = 0.0;
                for jj in j.saturating_sub(rj)..=(j + rj).min(h - 1) {
                    let dy = jj as f64 * geo.hy - yi;
                    let base = jj * w;
                    for ii in i.saturating_sub(ri)..=(i + ri).min(w - 1) {
                        let dx = ii as f64 * geo.hx - xi;
                        let dsp = dx * dx + dy * dy;
                        let dc = cv[base + ii] - ci;
                        let r = 0.5 * (eps.eps_x * dsp + eps.eps_c * dc * dc);
                        let dp = dphi_raw(kind, r);
                        sx += dp * dsp * dc;
                        sc += dp * dc * dc * dc;
                    }
                }
                row_x[i] = sx / (2.0 * n);
                row_c[i] = sc / (2.0 * n);
            }
        });
    (
        ScalarField::from_values(w, h, out_x),
        ScalarField::from_values(w, h, out_c),
    )
}

/// Explicit Euler integration of the consensus ODE from the image,
/// storing every intermediate field.
pub fn integrate_forward(
    img: &ImageGrid,
    ctrl: &ControlTrajectory,
    kind: KernelKind,
) -> Result<StateTrajectory> {
    let geometry = img.geometry();
    let mut fields = Vec::with_capacity(ctrl.steps() + 1);
    fields.push(img.to_field());
    for (m, eps) in ctrl.pairs().iter().enumerate() {
        let current = fields.last().expect("at least the initial field");
        let next = current.axpy(ctrl.dt(), &rhs(current, &geometry, eps, kind));
        if next.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: m });
        }
        fields.push(next);
    }
    Ok(StateTrajectory { geometry, fields })
}

/// Same Euler recursion, keeping only the terminal field. Used by the
/// line search, which never needs the intermediate nodes.
pub(crate) fn integrate_terminal(
    img: &ImageGrid,
    ctrl: &ControlTrajectory,
    kind: KernelKind,
) -> Result<ScalarField> {
    let geometry = img.geometry();
    let mut current = img.to_field();
    for (m, eps) in ctrl.pairs().iter().enumerate() {
        current = current.axpy(ctrl.dt(), &rhs(&current, &geometry, eps, kind));
        if current.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: m });
        }
    }
    Ok(current)
}
