//! Desk-scale computational twin of entangled-granular picking.
//!
//! The crate generates grain and target geometries, runs quasi-static
//! capsule-contact simulations of packing / integrity / picking experiments,
//! detects interlocking between bodies, and fits the picked-amount prediction
//! model together with its statistical companions (dominance analysis,
//! Bayesian predictive bands, significance tests).
//!
//! Unit conventions used throughout the simulation layer:
//! mm (length), g (mass), s (time). Derived units are then
//! µN (force, g·mm/s²) and nJ (energy, g·mm²/s²), so a kinetic-energy
//! threshold of 1.0 in simulation units equals 1e-9 J.

pub mod data_io;
pub mod entangle;
pub mod exec;
pub mod geometry;
pub mod model;
pub mod pick;
pub mod simulate;
pub mod stats;

/// Standard gravity in simulation units (mm/s²).
pub const GRAVITY_MM_S2: f64 = 9810.0;
