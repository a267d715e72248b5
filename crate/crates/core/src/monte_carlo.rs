//! Monte Carlo variant of the integer lattice gas.
//!
//! Each step every cell makes a fixed number of collision attempts.  An
//! attempt draws two distinct particles uniformly from the cell's multiset
//! (rest particles count as individuals of mass 1):
//!
//! * a (+1, -1) pair *crunches* into two rest particles with probability
//!   `lambda`;
//! * a rest/rest pair *splits* into a (+1, -1) pair with probability
//!   `lambda / 8`.
//!
//! The 1:8 acceptance ratio makes the per-attempt mean drift equal to
//! [`mean_field_drift`], whose fixed point is the square-root equilibrium
//! [`equilibrium_theory`]; a uniform acceptance would thermalize to
//! different weights.
//!
//! Randomness is counter-based: every draw is a hash of
//! `(seed, t, x, attempt, slot)`, so trajectories are reproducible and
//! independent of cell traversal order or parallel scheduling.

use alloc::vec::Vec;
use core::fmt;

use crate::lattice::{Cell, PopulationField};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stateless keyed generator: output depends only on the seed and the
/// coordinates of the draw.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { key: mix(seed) }
    }

    /// Uniform 64-bit word for draw `slot` of `attempt` at site `x`, time `t`.
    #[inline]
    pub fn word(&self, t: u64, x: u64, attempt: u64, slot: u64) -> u64 {
        let mut h = self.key;
        h = mix(h ^ t);
        h = mix(h ^ x);
        h = mix(h ^ attempt);
        mix(h ^ slot)
    }

    /// Uniform index in `[0, n)` via multiply-shift reduction.
    #[inline]
    pub fn index(&self, n: u64, t: u64, x: u64, attempt: u64, slot: u64) -> u64 {
        ((self.word(t, x, attempt, slot) as u128 * n as u128) >> 64) as u64
    }

    /// Uniform f64 in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn unit(&self, t: u64, x: u64, attempt: u64, slot: u64) -> f64 {
        (self.word(t, x, attempt, slot) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Errors from Monte Carlo parameter validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum McError {
    /// Collision probability outside `[0, 1]`.
    Probability(f64),
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::Probability(v) => {
                write!(f, "collision probability must lie in [0, 1], got {v}")
            }
        }
    }
}

impl core::error::Error for McError {}

/// Monte Carlo engine parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McParams {
    /// Crunch acceptance probability (splits accept at `lambda / 8`).
    pub lambda: f64,
    /// Collision attempts per cell per step.
    pub attempts_per_cell: u32,
    pub seed: u64,
}

impl McParams {
    pub fn new(lambda: f64, attempts_per_cell: u32, seed: u64) -> Result<Self, McError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(McError::Probability(lambda));
        }
        Ok(Self { lambda, attempts_per_cell, seed })
    }
}

/// Species of a drawn particle, by position in the (minus, zero, plus)
/// ordering of the cell's multiset.
#[inline]
fn species(idx: u64, nm: u64, nz: u64) -> u8 {
    if idx < nm {
        0
    } else if idx < nm + nz {
        1
    } else {
        2
    }
}

/// Collide one cell for `params.attempts_per_cell` attempts.  Populations
/// must be integral (the engine operates on particle counts); cells with
/// fewer than two particles are returned unchanged.
pub fn collide(cell: &Cell, params: &McParams, rng: &CounterRng, t: u64, x: u64) -> Cell {
    debug_assert!(
        cell.n_minus.fract() == 0.0 && cell.n_zero.fract() == 0.0 && cell.n_plus.fract() == 0.0,
        "Monte Carlo engine expects integer populations"
    );
    let mut nm = cell.n_minus as u64;
    let mut nz = cell.n_zero as u64;
    let mut np = cell.n_plus as u64;
    let rho = nm + nz + np;
    if rho < 2 {
        return *cell;
    }
    for attempt in 0..params.attempts_per_cell as u64 {
        // Two distinct indices, uniform over ordered pairs.
        let i = rng.index(rho, t, x, attempt, 0);
        let mut j = rng.index(rho - 1, t, x, attempt, 1);
        if j >= i {
            j += 1;
        }
        let a = species(i, nm, nz);
        let b = species(j, nm, nz);
        let accept = |threshold: f64| rng.unit(t, x, attempt, 2) < threshold;
        match (a.min(b), a.max(b)) {
            // Opposite movers crunch with probability lambda.
            (0, 2) if accept(params.lambda) => {
                nm -= 1;
                np -= 1;
                nz += 2;
            }
            // Two rest particles split with probability lambda / 8.
            (1, 1) if accept(params.lambda / 8.0) => {
                nz -= 2;
                nm += 1;
                np += 1;
            }
            _ => {}
        }
    }
    Cell::new(nm as f64, nz as f64, np as f64)
}

/// One full update: collide every cell, then stream.
pub fn step(field: &mut PopulationField, params: &McParams, t: u64) {
    let rng = CounterRng::new(params.seed);
    for x in 0..field.len() {
        let out = collide(&field.cell(x), params, &rng, t, x as u64);
        field.set(x, out);
    }
    field.stream();
}

/// Run `steps` updates, recording every field (initial state included).
/// The time index feeds the RNG, so a run is a pure function of
/// `(initial, params, steps)`.
pub fn run(initial: PopulationField, params: &McParams, steps: usize) -> Vec<PopulationField> {
    let mut history = Vec::with_capacity(steps + 1);
    let mut field = initial;
    history.push(field.clone());
    for t in 0..steps {
        step(&mut field, params, t as u64);
        history.push(field.clone());
    }
    history
}

/// Stationary populations of the stochastic pair dynamics:
///
/// `f_i = rho w_i [1 + 3 c_i u + (3 c_i^2 - 1)(sqrt(1 + 3u^2) - 1)]`
///
/// with `w = (1/6, 2/3, 1/6)`.  The square root takes the positive branch —
/// the only one yielding non-negative populations.
pub fn equilibrium_theory(rho: f64, u: f64) -> Cell {
    let excess = (1.0 + 3.0 * u * u).sqrt() - 1.0;
    Cell {
        n_minus: rho / 6.0 * (1.0 - 3.0 * u + 2.0 * excess),
        n_zero: rho * 2.0 / 3.0 * (1.0 - excess),
        n_plus: rho / 6.0 * (1.0 + 3.0 * u + 2.0 * excess),
    }
}

/// Mean-field expected population change per attempt,
///
/// `(lambda / rho^2) * (f_0^2 / 8 - 2 f_minus f_plus) * (1, -2, 1)`,
///
/// valid for large occupation numbers.  Its zero is [`equilibrium_theory`].
/// Diagnostic only — the engine path is the sampled process above.
pub fn mean_field_drift(cell: &Cell, lambda: f64) -> [f64; 3] {
    let rho = cell.rho();
    if rho <= 0.0 {
        return [0.0; 3];
    }
    let net = lambda / (rho * rho)
        * (cell.n_zero * cell.n_zero / 8.0 - 2.0 * cell.n_minus * cell.n_plus);
    [net, -2.0 * net, net]
}
