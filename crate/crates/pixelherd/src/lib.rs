//! Colour quantization and segmentation of grey-scale images by steering
//! a pixel-level consensus ODE with optimal control.
//!
//! Every pixel is an agent whose intensity is attracted toward the
//! intensities of nearby, similarly coloured agents. Two time-dependent
//! scalings — one spatial, one tonal — decide who interacts with whom,
//! and they are the control: a direct-adjoint loop tunes them so that the
//! final image minimises either a smooth gradient penalty
//! ([`dal::dal_solve`]) or an edge-preserving total-variation objective
//! handled by a splitting scheme ([`admm::admm_solve`]). Clusters in the
//! intensity distribution — the colour quantization — emerge from the
//! dynamics instead of being prescribed.
//!
//! The long-form guide lives in the `book/` directory of the repository
//! (`mdbook build book`); its code listings compile and run as doctests
//! of this crate.

pub mod adjoint;
mod book;
pub mod admm;
pub mod cluster;
pub mod cost;
pub mod dal;
pub mod diffops;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod pgm;
pub mod runner;

pub use error::{Error, Result};
pub use grid::{GridGeometry, ImageGrid, ScalarField, VectorField};
pub use kernel::KernelKind;
