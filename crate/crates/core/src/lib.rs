//! Explicit singular solutions of `0 ≤ −Δ^m u ≤ f(u)` near an isolated singularity,
//! built from bump right-hand sides, with machine-checked certificates.
//!
//! Layers, bottom up:
//! - [`symcalc`]: exact rational calculus on radial expressions;
//! - [`kernel`]: fundamental solutions, `Γ`, `Γ_∞`, and the Taylor-remainder kernel;
//! - [`bump`]: the mollifier profile and bump right-hand sides;
//! - [`potential`]: the potential `N`, the solution `u = N + C|x|^{2−n}`, oracles;
//! - [`constructor`]: exponent sheets and per-theorem sequence recipes;
//! - [`kelvin`]: the m-Kelvin transform;
//! - [`verify`]: certificates.

pub mod bump;
pub mod constructor;
pub mod dd;
pub mod error;
pub mod kelvin;
pub mod kernel;
pub mod potential;
pub mod quad;
pub mod sampling;
pub mod symcalc;
pub mod verify;

pub use error::{Error, Result};
