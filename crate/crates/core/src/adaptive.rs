//! Adaptive integer lattice gas: split/crunch collisions with an optionally
//! velocity-dependent crunch rate.
//!
//! A *split* turns two rest particles into a (+1, -1) pair; a *crunch* is the
//! reverse.  Per step each cell applies the deterministic net collision term
//!
//! ```text
//! Xi_+ = Xi_- = lambda_s * n_0 / 2 - lambda_c * min(n_plus, n_minus)
//! Xi_0 = -2 * (lambda_s * n_0 / 2 - lambda_c * min(n_plus, n_minus))
//! ```
//!
//! so mass and momentum are conserved identically.  `lambda_s` scales the
//! split rate, `lambda_c` the crunch rate.  With both constant the gas
//! relaxes to a linear-in-|u| equilibrium (see [`crate::analysis`]); choosing
//! `lambda_c` per cell via [`adaptive_lambda_c`] moves the fixed point onto
//! the lattice-Boltzmann equilibrium instead.

use alloc::vec::Vec;
use core::fmt;

use crate::lattice::{round_half_even, Cell, PopulationField};

/// Largest |u| for which the adaptive crunch rate is positive: √(2/3).
/// Beyond it the rate formula goes negative and the cell must skip.
pub const ADAPTIVE_U_LIMIT: f64 = 0.816_496_580_927_726;

/// How the crunch rate is chosen each step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdaptiveLambda {
    /// Fixed crunch rate in `[0, 1]`.
    Constant(f64),
    /// Per-cell rate from [`adaptive_lambda_c`], targeting the local
    /// lattice-Boltzmann equilibrium; out-of-range cells skip collision.
    LocalLbm,
}

/// Errors from collision-parameter validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamError {
    /// `lambda_s` outside `[0, 1]`.
    SplitRate(f64),
    /// Constant `lambda_c` outside `[0, 1]`.
    CrunchRate(f64),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::SplitRate(v) => write!(f, "split rate must lie in [0, 1], got {v}"),
            ParamError::CrunchRate(v) => write!(f, "crunch rate must lie in [0, 1], got {v}"),
        }
    }
}

impl core::error::Error for ParamError {}

/// Collision configuration for the adaptive gas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionParams {
    pub lambda_s: f64,
    pub crunch: AdaptiveLambda,
    /// Round split and crunch magnitudes to whole particle counts
    /// (ties-to-even), keeping integer fields integer.
    pub integer_cast: bool,
}

impl CollisionParams {
    /// Constant-rate collisions; both rates validated into `[0, 1]`.
    pub fn constant(lambda_s: f64, lambda_c: f64) -> Result<Self, ParamError> {
        if !(0.0..=1.0).contains(&lambda_s) {
            return Err(ParamError::SplitRate(lambda_s));
        }
        if !(0.0..=1.0).contains(&lambda_c) {
            return Err(ParamError::CrunchRate(lambda_c));
        }
        Ok(Self {
            lambda_s,
            crunch: AdaptiveLambda::Constant(lambda_c),
            integer_cast: false,
        })
    }

    /// Per-cell adaptive crunch rate.
    pub fn local_lbm(lambda_s: f64) -> Result<Self, ParamError> {
        if !(0.0..=1.0).contains(&lambda_s) {
            return Err(ParamError::SplitRate(lambda_s));
        }
        Ok(Self {
            lambda_s,
            crunch: AdaptiveLambda::LocalLbm,
            integer_cast: false,
        })
    }

    pub fn with_integer_cast(mut self, on: bool) -> Self {
        self.integer_cast = on;
        self
    }
}

/// Net population change of one collision, with `d_minus == d_plus` and
/// `d_zero == -2 d_plus` by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionTerm {
    pub d_minus: f64,
    pub d_zero: f64,
    pub d_plus: f64,
}

impl CollisionTerm {
    fn from_net(net: f64) -> Self {
        Self {
            d_minus: net,
            d_zero: -2.0 * net,
            d_plus: net,
        }
    }

    pub fn apply(&self, cell: &Cell) -> Cell {
        Cell {
            n_minus: cell.n_minus + self.d_minus,
            n_zero: cell.n_zero + self.d_zero,
            n_plus: cell.n_plus + self.d_plus,
        }
    }
}

/// Real-valued collision term `lambda_s n_0 / 2 - lambda_c min(n_plus, n_minus)`
/// applied symmetrically to the moving populations.
pub fn collision_term(cell: &Cell, lambda_s: f64, lambda_c: f64) -> CollisionTerm {
    let splits = lambda_s * cell.n_zero / 2.0;
    let crunches = lambda_c * cell.min_pair();
    CollisionTerm::from_net(splits - crunches)
}

/// Integer-cast collision term: split and crunch counts rounded to whole
/// particles (ties-to-even) before differencing, so integer fields stay
/// integer and the rest population stays even when it starts even.
pub fn integer_collision_term(cell: &Cell, lambda_s: f64, lambda_c: f64) -> CollisionTerm {
    let splits = round_half_even(lambda_s * cell.n_zero / 2.0);
    let crunches = round_half_even(lambda_c * cell.min_pair());
    CollisionTerm::from_net(splits - crunches)
}

/// Crunch rate that puts the collision fixed point on the lattice-Boltzmann
/// equilibrium at local velocity `u`:
///
/// `lambda_c = lambda_s (2 - 3u²) / (1 - 3|u| + 3u²)`
///
/// The denominator is positive for every real `u`; the numerator changes
/// sign at |u| = √(2/3).  The raw value is returned unchecked — callers that
/// need a usable rate go through [`adaptive_lambda_c`].
pub fn adaptive_lambda_c_raw(lambda_s: f64, u: f64) -> f64 {
    let u2 = u * u;
    lambda_s * (2.0 - 3.0 * u2) / (1.0 - 3.0 * u.abs() + 3.0 * u2)
}

/// Decision of the adaptive rate rule for one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdaptiveDecision {
    /// Usable rate in `(0, 1]`.
    Collide(f64),
    /// Rate fell outside `(0, 1]`; the whole collision is suppressed for
    /// this cell this step.
    Skip,
}

/// Checked adaptive crunch rate: `Collide` only when the raw rate lies in
/// `(0, 1]`.
pub fn adaptive_lambda_c(lambda_s: f64, u: f64) -> AdaptiveDecision {
    let lambda_c = adaptive_lambda_c_raw(lambda_s, u);
    if lambda_c > 0.0 && lambda_c <= 1.0 {
        AdaptiveDecision::Collide(lambda_c)
    } else {
        AdaptiveDecision::Skip
    }
}

/// Result of colliding one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Collided {
    pub cell: Cell,
    /// True when the adaptive rule suppressed the collision.
    pub skipped: bool,
}

/// Collide one cell under `params`.  Empty cells pass through untouched
/// (and do not count as skips: there was nothing to collide).
pub fn collide(cell: &Cell, params: &CollisionParams) -> Collided {
    if cell.rho() <= 0.0 {
        return Collided { cell: *cell, skipped: false };
    }
    let lambda_c = match params.crunch {
        AdaptiveLambda::Constant(lambda_c) => lambda_c,
        AdaptiveLambda::LocalLbm => match adaptive_lambda_c(params.lambda_s, cell.velocity()) {
            AdaptiveDecision::Collide(lambda_c) => lambda_c,
            AdaptiveDecision::Skip => return Collided { cell: *cell, skipped: true },
        },
    };
    let term = if params.integer_cast {
        integer_collision_term(cell, params.lambda_s, lambda_c)
    } else {
        collision_term(cell, params.lambda_s, lambda_c)
    };
    Collided { cell: term.apply(cell), skipped: false }
}

/// Per-step bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Cells whose collision was suppressed by the adaptive rule.
    pub skipped_cells: usize,
}

/// One full update: collide every cell, then stream.
pub fn step(field: &mut PopulationField, params: &CollisionParams) -> StepReport {
    let mut report = StepReport::default();
    for x in 0..field.len() {
        let out = collide(&field.cell(x), params);
        if out.skipped {
            report.skipped_cells += 1;
        }
        field.set(x, out.cell);
    }
    field.stream();
    report
}

/// Trajectory of a run plus per-step skip counts.
#[derive(Clone, Debug)]
pub struct RunHistory {
    /// Fields at t = 0..=steps (initial state included).
    pub history: Vec<PopulationField>,
    /// Skipped-cell count for each of the `steps` updates.
    pub skipped: Vec<usize>,
}

impl RunHistory {
    /// Fraction of all (cell, step) collision opportunities that skipped.
    pub fn skip_fraction(&self) -> f64 {
        if self.skipped.is_empty() {
            return 0.0;
        }
        let sites = self.history[0].len();
        let total: usize = self.skipped.iter().sum();
        total as f64 / (sites * self.skipped.len()) as f64
    }
}

/// Run `steps` updates from `initial`, recording every intermediate field.
pub fn run(initial: PopulationField, params: &CollisionParams, steps: usize) -> RunHistory {
    let mut history = Vec::with_capacity(steps + 1);
    let mut skipped = Vec::with_capacity(steps);
    let mut field = initial;
    history.push(field.clone());
    for _ in 0..steps {
        let report = step(&mut field, params);
        skipped.push(report.skipped_cells);
        history.push(field.clone());
    }
    RunHistory { history, skipped }
}
