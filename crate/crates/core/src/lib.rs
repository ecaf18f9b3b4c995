//! Lie derivatives of tensor, density and spinor fields on chart-described
//! pseudo-Riemannian manifolds.
//!
//! The crate is layered bottom-up:
//!
//! - [`exprcore`]: symbolic coordinate expressions (parse, differentiate,
//!   simplify, evaluate).
//! - [`liealg`]: matrix Lie algebra decompositions under a signature metric.
//! - [`geometry`]: metrics, connections, frames, frame-bundle lifts and the
//!   Killing-type residuals.
//! - [`spinor`]: gamma matrices, spin connection and spinor Lie derivatives.
//! - [`oracle`]: flow-based numerical ground truth.

pub mod exprcore;
pub mod liealg;
pub mod geometry;
pub mod spinor;
pub mod oracle;
