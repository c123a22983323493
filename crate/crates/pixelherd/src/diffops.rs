//! Discrete gradient, divergence, and Laplacian on the pixel lattice.
//!
//! The gradient uses forward differences with a zero row at the far
//! boundary; the divergence is its exact negative adjoint under the
//! cell-area inner product, so `<grad u, p> = -<u, div p>` holds to
//! rounding for every pair of fields. The Laplacian is the independent
//! 5-point stencil with reflected ghost nodes (zero normal derivative);
//! it agrees with `div(grad u)` away from the boundary.

use crate::grid::{GridGeometry, ScalarField, VectorField};

/// Forward-difference gradient; the far column/row of each component is 0.
pub fn gradient(u: &ScalarField, geo: &GridGeometry) -> VectorField {
    let (w, h) = (u.width(), u.height());
    let mut gx = ScalarField::zeros(w, h);
    let mut gy = ScalarField::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            if i + 1 < w {
                gx.set(i, j, (u.get(i + 1, j) - u.get(i, j)) / geo.hx);
            }
            if j + 1 < h {
                gy.set(i, j, (u.get(i, j + 1) - u.get(i, j)) / geo.hy);
            }
        }
    }
    VectorField::new(gx, gy)
}

/// Negative adjoint of [`gradient`]: backward differences with the
/// boundary rows adjusted so the adjoint identity is exact.
pub fn divergence(p: &VectorField, geo: &GridGeometry) -> ScalarField {
    let (w, h) = (p.width(), p.height());
    let mut out = ScalarField::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let mut d = 0.0;
            if w > 1 {
                d += if i == 0 {
                    p.x.get(0, j) / geo.hx
                } else if i == w - 1 {
                    -p.x.get(w - 2, j) / geo.hx
                } else {
                    (p.x.get(i, j) - p.x.get(i - 1, j)) / geo.hx
                };
            }
            if h > 1 {
                d += if j == 0 {
                    p.y.get(i, 0) / geo.hy
                } else if j == h - 1 {
                    -p.y.get(i, h - 2) / geo.hy
                } else {
                    (p.y.get(i, j) - p.y.get(i, j - 1)) / geo.hy
                };
            }
            out.set(i, j, d);
        }
    }
    out
}

/// 5-point Laplacian with reflected ghost nodes: the ghost value across a
/// boundary node mirrors its inner neighbour, giving a zero normal
/// derivative there. Degenerate axes contribute nothing.
pub fn laplacian(u: &ScalarField, geo: &GridGeometry) -> ScalarField {
    let (w, h) = (u.width(), u.height());
    let mut out = ScalarField::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            if w > 1 {
                let left = if i == 0 { u.get(1, j) } else { u.get(i - 1, j) };
                let right = if i == w - 1 {
                    u.get(w - 2, j)
                } else {
                    u.get(i + 1, j)
                };
                acc += (right - 2.0 * u.get(i, j) + left) / (geo.hx * geo.hx);
            }
            if h > 1 {
                let below = if j == 0 { u.get(i, 1) } else { u.get(i, j - 1) };
                let above = if j == h - 1 {
                    u.get(i, h - 2)
                } else {
                    u.get(i, j + 1)
                };
                acc += (above - 2.0 * u.get(i, j) + below) / (geo.hy * geo.hy);
            }
            out.set(i, j, acc);
        }
    }
    out
}
