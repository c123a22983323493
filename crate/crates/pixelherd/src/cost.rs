//! Discrete evaluation of the four objective functionals.
//!
//! All of them share one rectangular quadrature (cell area `hx * hy`
//! times the pointwise integrand, summed over pixels) and the
//! forward-difference gradient from [`crate::diffops`], so the algebraic
//! identities between them hold to rounding and not just asymptotically.

use crate::diffops::gradient;
use crate::error::{Error, Result};
use crate::grid::{GridGeometry, ImageGrid, ScalarField, VectorField};

/// One functional value split into its additive parts. Parts that do not
/// appear in a given functional are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub total: f64,
    pub smoothness: f64,
    pub fidelity: f64,
    pub coupling: f64,
    pub penalty: f64,
}

impl CostBreakdown {
    fn assemble(smoothness: f64, fidelity: f64, coupling: f64, penalty: f64) -> Self {
        Self {
            total: smoothness + fidelity + coupling + penalty,
            smoothness,
            fidelity,
            coupling,
            penalty,
        }
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

fn fidelity_term(u: &ScalarField, img: &ImageGrid, alpha: f64, area: f64) -> f64 {
    let mut acc = 0.0;
    for (uv, iv) in u.values().iter().zip(img.values()) {
        let d = uv - iv;
        acc += d * d;
    }
    0.5 * alpha * area * acc
}

/// Smooth objective: `integral of 1/2 |grad u|^2 + alpha/2 (u - I)^2`.
pub fn cost_quadratic(u: &ScalarField, img: &ImageGrid, alpha: f64) -> Result<CostBreakdown> {
    require_positive("alpha", alpha)?;
    assert_eq!(u.len(), img.len(), "field/image shape mismatch");
    let geo = GridGeometry::new(u.width(), u.height());
    let g = gradient(u, &geo);
    let mut smooth = 0.0;
    for (gx, gy) in g.x.values().iter().zip(g.y.values()) {
        smooth += gx * gx + gy * gy;
    }
    let area = geo.cell_area();
    Ok(CostBreakdown::assemble(
        0.5 * area * smooth,
        fidelity_term(u, img, alpha, area),
        0.0,
        0.0,
    ))
}

/// Total-variation objective: `integral of |grad u| + alpha/2 (u - I)^2`,
/// with the isotropic per-pixel Euclidean norm.
pub fn cost_tv(u: &ScalarField, img: &ImageGrid, alpha: f64) -> Result<CostBreakdown> {
    require_positive("alpha", alpha)?;
    assert_eq!(u.len(), img.len(), "field/image shape mismatch");
    let geo = GridGeometry::new(u.width(), u.height());
    let g = gradient(u, &geo);
    let mut tv = 0.0;
    for (gx, gy) in g.x.values().iter().zip(g.y.values()) {
        tv += (gx * gx + gy * gy).sqrt();
    }
    let area = geo.cell_area();
    Ok(CostBreakdown::assemble(
        area * tv,
        fidelity_term(u, img, alpha, area),
        0.0,
        0.0,
    ))
}

/// Regularised Lagrangian of the gradient split `v = grad u`:
/// `integral of |v| + mu . (v - grad u) + rho/2 |v - grad u|^2 + alpha/2 (u - I)^2`.
pub fn cost_lagrangian(
    u: &ScalarField,
    v: &VectorField,
    mu: &VectorField,
    img: &ImageGrid,
    alpha: f64,
    rho: f64,
) -> Result<CostBreakdown> {
    require_positive("alpha", alpha)?;
    require_positive("rho", rho)?;
    assert_eq!(u.len(), img.len(), "field/image shape mismatch");
    assert!(v.x.same_shape(u) && mu.x.same_shape(u), "dual shape mismatch");
    let geo = GridGeometry::new(u.width(), u.height());
    let g = gradient(u, &geo);
    let mut vnorm = 0.0;
    let mut coupling = 0.0;
    let mut penalty = 0.0;
    for idx in 0..u.len() {
        let (vx, vy) = (v.x.values()[idx], v.y.values()[idx]);
        let rx = vx - g.x.values()[idx];
        let ry = vy - g.y.values()[idx];
        vnorm += (vx * vx + vy * vy).sqrt();
        coupling += mu.x.values()[idx] * rx + mu.y.values()[idx] * ry;
        penalty += rx * rx + ry * ry;
    }
    let area = geo.cell_area();
    Ok(CostBreakdown::assemble(
        area * vnorm,
        fidelity_term(u, img, alpha, area),
        area * coupling,
        0.5 * rho * area * penalty,
    ))
}

/// The completed-square form used by the splitting solver:
/// `integral of rho/2 |v - grad u + mu/rho|^2 + |v| + alpha/2 (u - I)^2`.
///
/// Equals [`cost_lagrangian`] plus `1/(2 rho) * integral of |mu|^2`, so the
/// two share every minimiser in `(u, v)` at fixed `mu`.
pub fn cost_admm_objective(
    u: &ScalarField,
    v: &VectorField,
    mu: &VectorField,
    img: &ImageGrid,
    alpha: f64,
    rho: f64,
) -> Result<CostBreakdown> {
    require_positive("alpha", alpha)?;
    require_positive("rho", rho)?;
    assert_eq!(u.len(), img.len(), "field/image shape mismatch");
    assert!(v.x.same_shape(u) && mu.x.same_shape(u), "dual shape mismatch");
    let geo = GridGeometry::new(u.width(), u.height());
    let g = gradient(u, &geo);
    let mut vnorm = 0.0;
    let mut penalty = 0.0;
    for idx in 0..u.len() {
        let (vx, vy) = (v.x.values()[idx], v.y.values()[idx]);
        let rx = vx - g.x.values()[idx] + mu.x.values()[idx] / rho;
        let ry = vy - g.y.values()[idx] + mu.y.values()[idx] / rho;
        vnorm += (vx * vx + vy * vy).sqrt();
        penalty += rx * rx + ry * ry;
    }
    let area = geo.cell_area();
    Ok(CostBreakdown::assemble(
        area * vnorm,
        fidelity_term(u, img, alpha, area),
        0.0,
        0.5 * rho * area * penalty,
    ))
}
