//! Compactly supported interaction kernels.
//!
//! The default is the C2 Wendland polynomial `(4r + 1)(1 - r)^4` on
//! `[0, 1]`, which is non-negative and equals 1 at the origin, so agents
//! always attract each other. A second variant, `(4r - 1)(1 - r)^4`, is
//! kept selectable for comparison; it is repulsive at short range
//! (negative near `r = 0`) and generally breaks consensus behaviour.

use crate::error::{Error, Result};

/// Which polynomial to use inside the unit support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelKind {
    /// `(4r + 1)(1 - r)^4` on `[0, 1]`, 0 outside.
    #[default]
    StandardWendland,
    /// `(4r - 1)(1 - r)^4` on `[0, 1]`, 0 outside.
    PaperPrinted,
}

/// Kernel value at radius `r >= 0`.
pub fn phi(kind: KernelKind, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::NegativeRadius(r));
    }
    Ok(phi_raw(kind, r))
}

/// Kernel derivative at radius `r >= 0`; continuous at the support edge.
pub fn dphi(kind: KernelKind, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::NegativeRadius(r));
    }
    Ok(dphi_raw(kind, r))
}

#[inline(always)]
pub(crate) fn phi_raw(kind: KernelKind, r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - r;
    let s2 = s * s;
    let q = s2 * s2;
    match kind {
        KernelKind::StandardWendland => (4.0 * r + 1.0) * q,
        KernelKind::PaperPrinted => (4.0 * r - 1.0) * q,
    }
}

#[inline(always)]
pub(crate) fn dphi_raw(kind: KernelKind, r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - r;
    let s3 = s * s * s;
    match kind {
        KernelKind::StandardWendland => -20.0 * r * s3,
        KernelKind::PaperPrinted => (8.0 - 20.0 * r) * s3,
    }
}
