//! Single-relaxation-time (BGK) D1Q3 lattice-Boltzmann reference engine.
//!
//! Distributions live in the same [`PopulationField`] as the particle
//! engines; only the collision differs.  Kinematic viscosity relates to the
//! relaxation time as `nu = (tau - 1/2) / 3` in lattice units, so `tau > 1/2`
//! is the physically damped regime.

use alloc::vec::Vec;
use core::fmt;

use crate::lattice::{Cell, PopulationField};

/// Second-order equilibrium with weights `w = (1/6, 2/3, 1/6)`:
///
/// `g_i^eq = rho * w_i * (1 + 3 c_i u + 9/2 (c_i u)^2 - 3/2 u^2)`
///
/// The weights sum to one, so Σ g_i^eq = rho and Σ c_i g_i^eq = rho u hold
/// exactly for any `u`.
pub fn equilibrium(rho: f64, u: f64) -> Cell {
    // For c = ±1 the quadratic terms collapse: 9/2 u^2 - 3/2 u^2 = 3 u^2.
    let u2 = u * u;
    Cell {
        n_minus: rho / 6.0 * (1.0 - 3.0 * u + 3.0 * u2),
        n_zero: rho * 2.0 / 3.0 * (1.0 - 1.5 * u2),
        n_plus: rho / 6.0 * (1.0 + 3.0 * u + 3.0 * u2),
    }
}

/// Errors from BGK parameter validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LbmError {
    /// Relaxation time must be positive.
    NonPositiveTau(f64),
}

impl fmt::Display for LbmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LbmError::NonPositiveTau(tau) => write!(f, "relaxation time must be > 0, got {tau}"),
        }
    }
}

impl core::error::Error for LbmError {}

/// BGK parameters.  `tau < 1/2` means negative viscosity and is accepted
/// (scans probe it deliberately); `tau <= 0` is rejected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbmParams {
    pub tau: f64,
}

impl LbmParams {
    pub fn new(tau: f64) -> Result<Self, LbmError> {
        if tau > 0.0 {
            Ok(Self { tau })
        } else {
            Err(LbmError::NonPositiveTau(tau))
        }
    }

    /// Kinematic viscosity `(tau - 1/2) / 3`.
    pub fn viscosity(&self) -> f64 {
        (self.tau - 0.5) / 3.0
    }
}

/// Relax one cell toward its local equilibrium: `g += (g_eq - g) / tau`.
pub fn bgk_collide(cell: &Cell, params: &LbmParams) -> Cell {
    let eq = equilibrium(cell.rho(), cell.velocity());
    let inv_tau = 1.0 / params.tau;
    Cell {
        n_minus: cell.n_minus + (eq.n_minus - cell.n_minus) * inv_tau,
        n_zero: cell.n_zero + (eq.n_zero - cell.n_zero) * inv_tau,
        n_plus: cell.n_plus + (eq.n_plus - cell.n_plus) * inv_tau,
    }
}

/// Collide every cell, then stream.
pub fn step(field: &mut PopulationField, params: &LbmParams) {
    for x in 0..field.len() {
        field.set(x, bgk_collide(&field.cell(x), params));
    }
    field.stream();
}

/// Run `steps` steps and return the trajectory including the initial field.
pub fn run(initial: PopulationField, params: &LbmParams, steps: usize) -> Vec<PopulationField> {
    let mut history = Vec::with_capacity(steps + 1);
    let mut field = initial;
    history.push(field.clone());
    for _ in 0..steps {
        step(&mut field, params);
        history.push(field.clone());
    }
    history
}
