//! Numerical toolkit for based loops in SU(n).
//!
//! A based loop is a finite matrix Fourier polynomial `γ(z) = Σ A_k z^k`
//! taking values in SU(n) with `γ(1) = I`. The crate provides the loop
//! arithmetic, the energy/holonomy moment map for the circle-and-group
//! action, a finite-window Grassmannian model of the loop space with its
//! determinant-line weight bookkeeping, and small convex-geometry tools
//! (hulls, LP membership, Hausdorff distance) used to probe convexity of
//! the moment image at desk scale.

pub mod error;
pub mod grassmann;
pub mod hull;
pub mod lie;
pub mod loops;
pub mod moment;
pub mod seeds;

mod mat;

pub use error::{Error, Result};
pub use mat::{inner, CMatrix, INNER_SCALE};
