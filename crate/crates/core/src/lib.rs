//! One-dimensional three-velocity (D1Q3) lattice-gas engines on a periodic ring.
//!
//! Four engines share the same field representation and streaming rule and
//! differ only in how they collide:
//!
//! * [`adaptive`] — integer lattice gas with *split* (two rest particles →
//!   one left/right pair) and *crunch* (one pair → two rest particles)
//!   collisions.  The crunch rate can be held constant or adapted per cell so
//!   that the local fixed point matches the lattice-Boltzmann equilibrium.
//! * [`lbm`] — single-relaxation-time (BGK) lattice-Boltzmann reference.
//! * [`monte_carlo`] — stochastic pair-collision variant of the integer gas,
//!   driven by a counter-based RNG so trajectories are reproducible and
//!   independent of traversal order.
//! * [`quantum`] — the adaptive engine expressed as a quantum circuit on a
//!   statevector simulator: amplitude encoding, a non-unitary collision
//!   operator embedded via SVD into a linear combination of two unitaries,
//!   and controlled-shift streaming.
//!
//! [`analysis`] holds the closed-form equilibria, time-averaged equilibrium
//! measurement, hydrodynamic residual diagnostics, and the parameter scans
//! used to compare engines.
//!
//! # Conventions
//!
//! Particle velocities are `c = (-1, 0, +1)` with populations
//! `(n_minus, n_zero, n_plus)` per cell.  Reported velocities are always the
//! plain `u = (n_plus - n_minus) / rho`; the √3-scaled momentum coordinate
//! exists only inside [`lattice::MomentVector`].  Site `x` streams right
//! movers to `x+1` and left movers to `x-1`, wrapping periodically.
//!
//! The crate is `no_std`-compatible (`default-features = false`); it needs
//! `alloc` for field and statevector storage.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adaptive;
pub mod analysis;
pub mod lattice;
pub mod lbm;
pub mod monte_carlo;
pub mod quantum;
pub mod svd;

pub use adaptive::{AdaptiveLambda, CollisionParams, CollisionTerm};
pub use lattice::{Cell, MomentVector, PopulationField};
