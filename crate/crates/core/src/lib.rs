//! Point-mass billiards under constant gravity inside a reflecting mirror `y = f(x)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dual numbers, bracketed root finding and 1D minimisation.
//! - [`mirror`]: built-in mirrors and parsed expression mirrors with exact slopes.
//! - [`dynamics`]: flight parabolas, reflection, impact search and the bounce simulator.
//! - [`caustics`]: the foci curve, the two envelope curves and the confined domain.
//! - [`verify`]: checks tying simulated trajectories to the analytic curves.
//!
//! Batch work (curve sampling, nearest-point scans, randomized oracle runs) goes
//! through [`par`], which uses rayon when the `parallel` feature is enabled and a
//! plain iterator otherwise. Results are identical either way.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caustics;
pub mod dynamics;
pub mod mirror;
pub mod numerics;
pub mod par;
pub mod verify;

mod vec2;

pub use vec2::Vec2;
