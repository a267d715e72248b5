//! Statevector implementation of the adaptive lattice gas as a quantum
//! circuit.
//!
//! # Encoding
//!
//! One step uses `1 + 2 + log2(N)` qubits: an ancilla, a two-qubit
//! occupation register, and a position register.  For each site `x` the
//! occupation basis carries
//!
//! ```text
//! |00> -> n_zero(x)      |01> -> n_plus(x)
//! |10> -> n_minus(x)     |11> -> lambda_c(x) * min(n_plus, n_minus)(x)
//! ```
//!
//! The `|11>` slot holds the precomputed nonlinear crunch magnitude, which
//! is what lets a linear operator express the collision.  Amplitudes are the
//! raw values divided by their Euclidean norm; the norm is kept as a
//! classical `scale` factor so populations are always recoverable as
//! `scale * amplitude`.
//!
//! # Collision
//!
//! In that basis the collision update is the non-unitary 4×4 matrix
//! [`collision_matrix`].  It embeds into the circuit via SVD,
//! `C = U F V`, with the non-negative diagonal `F` realized as half the sum
//! of two diagonal unitaries: `F = sigma_max (W1 + W2) / 2` where
//! `W1/W2 = diag(exp(±i theta_k))` and `theta_k = arccos(F_kk / sigma_max)`.
//! The circuit is: H on the ancilla, `V` on the occupation register, `W1`
//! controlled on the ancilla and `W2` anti-controlled, then `U`, then H
//! again, then post-selection of the ancilla on `|0>`.  Post-selection is
//! deterministic renormalization here: the discarded branch norm folds into
//! `scale`, so `scale * amplitudes` still equals the exact matrix action.
//!
//! # Streaming and measurement
//!
//! Streaming is a controlled cyclic shift of the position register:
//! `x -> x+1` on `|01>`, `x -> x-1` on `|10>`, identity on `|00>` and
//! `|11>`.  The `|11>` amplitude is stale after collision and streaming; a
//! step therefore ends by decoding the three populations and re-encoding on
//! the next step, which recomputes it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use num_complex::Complex64;

use crate::adaptive::{
    adaptive_lambda_c, adaptive_lambda_c_raw, AdaptiveDecision, AdaptiveLambda, CollisionParams,
};
use crate::lattice::{Cell, PopulationField};
use crate::svd::{svd4, Svd4};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Ancilla branch norms below this are a degenerate post-selection.
pub const POST_SELECT_TOL: f64 = 1e-14;
/// Relative tolerance of the decoded-mass conservation check.
pub const MASS_CHECK_TOL: f64 = 1e-9;

/// Errors from the quantum engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuantumError {
    /// The position register needs a power-of-two site count >= 2.
    SizeNotPowerOfTwo(usize),
    /// An all-zero field has no normalizable amplitude vector.
    ZeroField,
    /// The ancilla-|0> branch norm collapsed below [`POST_SELECT_TOL`].
    DegeneratePostSelection,
    /// Decoded total mass drifted from the encoded total.
    MassNotConserved { encoded: f64, decoded: f64 },
}

impl fmt::Display for QuantumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantumError::SizeNotPowerOfTwo(n) => {
                write!(f, "site count must be a power of two >= 2, got {n}")
            }
            QuantumError::ZeroField => write!(f, "cannot encode an all-zero field"),
            QuantumError::DegeneratePostSelection => {
                write!(f, "ancilla |0> branch norm below {POST_SELECT_TOL}")
            }
            QuantumError::MassNotConserved { encoded, decoded } => write!(
                f,
                "decoded mass {decoded} deviates from encoded mass {encoded} beyond relative {MASS_CHECK_TOL}"
            ),
        }
    }
}

impl core::error::Error for QuantumError {}

/// Collision update in the `(|00>, |01>, |10>, |11>)` occupation basis:
///
/// ```text
///     (1 - ls   0   0    2)
/// C = (ls / 2   1   0   -1)
///     (ls / 2   0   1   -1)
///     (  0      0   0    1)
/// ```
///
/// Row reading: post-collision rest = `(1 - ls) n_0 + 2 m`, each mover gains
/// `ls n_0 / 2` from splits and loses `m` to crunches, and the nonlinear
/// slot `m = lambda_c min(n_plus, n_minus)` passes through (stale until the
/// next encode).
pub fn collision_matrix(lambda_s: f64) -> [[f64; 4]; 4] {
    [
        [1.0 - lambda_s, 0.0, 0.0, 2.0],
        [lambda_s / 2.0, 1.0, 0.0, -1.0],
        [lambda_s / 2.0, 0.0, 1.0, -1.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// SVD-based circuit factors of [`collision_matrix`].
#[derive(Clone, Copy, Debug)]
pub struct CollisionFactorization {
    pub lambda_s: f64,
    /// Left orthogonal factor, applied after the controlled phases.
    pub u: [[f64; 4]; 4],
    /// Right orthogonal factor (literal: `C = u · diag(sigma) · v`).
    pub v: [[f64; 4]; 4],
    /// Singular values, non-increasing.
    pub sigma: [f64; 4],
    /// Phase angles `arccos(sigma_k / sigma_max)` of the two diagonal
    /// unitaries averaging to `diag(sigma) / sigma_max`.
    pub thetas: [f64; 4],
}

impl CollisionFactorization {
    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }
}

/// Factor the collision for split rate `lambda_s`.
pub fn factorize(lambda_s: f64) -> CollisionFactorization {
    let Svd4 { u, sigma, v } = svd4(&collision_matrix(lambda_s));
    let sigma_max = sigma[0];
    let mut thetas = [0.0; 4];
    for (theta, s) in thetas.iter_mut().zip(sigma.iter()) {
        // Clamp against rounding; sigma_k <= sigma_max by sorting.
        *theta = (s / sigma_max).clamp(-1.0, 1.0).acos();
    }
    CollisionFactorization { lambda_s, u, v, sigma, thetas }
}

/// Statevector over ancilla ⊗ occupation ⊗ position, with the classical
/// scale factor that restores absolute populations.
///
/// Amplitude layout: index `(a * 4 + q) * n + x` for ancilla bit `a`,
/// occupation basis `q` (0..4 as in [`collision_matrix`]), site `x`.
#[derive(Clone, Debug)]
pub struct QuantumState {
    amps: Vec<Complex64>,
    n: usize,
    scale: f64,
    mass_checksum: f64,
}

impl QuantumState {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Qubits in the position register.
    pub fn position_qubits(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Total qubit count: ancilla + occupation pair + position register.
    pub fn qubit_count(&self) -> u32 {
        3 + self.position_qubits()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Raw encoded value at occupation slot `q`, site `x`, ancilla |0>.
    pub fn raw_value(&self, q: usize, x: usize) -> Complex64 {
        self.amps[q * self.n + x] * self.scale
    }

    /// Euclidean norm of the statevector; 1 up to rounding between gates.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Auxiliary `|11>` value a cell is encoded with.
///
/// Normally `lambda_c * min(n_plus, n_minus)`, the magnitude of the crunch
/// half of the collision.  When the adaptive rate falls outside `(0, 1]` the
/// classical engine skips the cell; the circuit applies one fixed collision
/// matrix everywhere, so the skip is realized by encoding
/// `lambda_s * n_zero / 2` instead — exactly the value that cancels the
/// split term and turns the matrix into the identity on that cell.
fn auxiliary_value(cell: &Cell, params: &CollisionParams) -> f64 {
    match params.crunch {
        AdaptiveLambda::Constant(lambda_c) => lambda_c * cell.min_pair(),
        AdaptiveLambda::LocalLbm => {
            match adaptive_lambda_c(params.lambda_s, cell.velocity()) {
                AdaptiveDecision::Collide(lambda_c) => lambda_c * cell.min_pair(),
                AdaptiveDecision::Skip => params.lambda_s * cell.n_zero / 2.0,
            }
        }
    }
}

/// Number of non-empty cells whose adaptive crunch rate falls outside
/// `(0, 1]` — cells encoded in free-streaming form so that the uniform
/// collision matrix leaves them unchanged, mirroring the classical skip.
/// Always zero in constant-rate mode.
pub fn adaptive_out_of_range_cells(field: &PopulationField, params: &CollisionParams) -> usize {
    match params.crunch {
        AdaptiveLambda::Constant(_) => 0,
        AdaptiveLambda::LocalLbm => field
            .cells()
            .filter(|cell| {
                if cell.rho() <= 0.0 {
                    return false;
                }
                let lambda_c = adaptive_lambda_c_raw(params.lambda_s, cell.velocity());
                !(lambda_c > 0.0 && lambda_c <= 1.0)
            })
            .count(),
    }
}

/// Amplitude-encode a field.  The site count must be a power of two (>= 2)
/// and the field must carry some mass.
pub fn encode(field: &PopulationField, params: &CollisionParams) -> Result<QuantumState, QuantumError> {
    let n = field.len();
    if !n.is_power_of_two() || n < 2 {
        return Err(QuantumError::SizeNotPowerOfTwo(n));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 8 * n];
    let mut norm_sq = 0.0;
    for x in 0..n {
        let cell = field.cell(x);
        let m = auxiliary_value(&cell, params);
        for (q, value) in [cell.n_zero, cell.n_plus, cell.n_minus, m].into_iter().enumerate() {
            amps[q * n + x] = Complex64::new(value, 0.0);
            norm_sq += value * value;
        }
    }
    if norm_sq <= 0.0 {
        return Err(QuantumError::ZeroField);
    }
    let scale = norm_sq.sqrt();
    for amp in amps.iter_mut() {
        *amp /= scale;
    }
    Ok(QuantumState {
        amps,
        n,
        scale,
        mass_checksum: field.total_mass(),
    })
}

/// Hadamard on the ancilla qubit.
fn hadamard_ancilla(state: &mut QuantumState) {
    let half = 4 * state.n;
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    for idx in 0..half {
        let lo = state.amps[idx];
        let hi = state.amps[idx + half];
        state.amps[idx] = (lo + hi) * inv_sqrt2;
        state.amps[idx + half] = (lo - hi) * inv_sqrt2;
    }
}

/// Real 4×4 gate on the occupation register, on both ancilla branches.
fn apply_occupation(state: &mut QuantumState, m: &[[f64; 4]; 4]) {
    let n = state.n;
    for a in 0..2 {
        for x in 0..n {
            let base = a * 4 * n + x;
            let input = [
                state.amps[base],
                state.amps[base + n],
                state.amps[base + 2 * n],
                state.amps[base + 3 * n],
            ];
            for (q, row) in m.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, coeff) in row.iter().enumerate() {
                    acc += input[r] * *coeff;
                }
                state.amps[base + q * n] = acc;
            }
        }
    }
}

/// Diagonal phases `exp(i sign * theta_q)` on the occupation register of one
/// ancilla branch (`a = 1` for the controlled gate, `a = 0` for the
/// anti-controlled one).
fn apply_controlled_phases(state: &mut QuantumState, thetas: &[f64; 4], a: usize, sign: f64) {
    let n = state.n;
    for (q, theta) in thetas.iter().enumerate() {
        let phase = Complex64::new((sign * theta).cos(), (sign * theta).sin());
        let base = (a * 4 + q) * n;
        for x in 0..n {
            state.amps[base + x] *= phase;
        }
    }
}

/// Project the ancilla on |0>, renormalize, and fold the branch norm and
/// `sigma_max` into the scale so `scale * amplitudes` equals the exact
/// collision-matrix action on the encoded values.
fn project_ancilla_zero(state: &mut QuantumState, sigma_max: f64) -> Result<(), QuantumError> {
    let half = 4 * state.n;
    let branch_norm = state.amps[..half]
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if branch_norm < POST_SELECT_TOL {
        return Err(QuantumError::DegeneratePostSelection);
    }
    for amp in state.amps[..half].iter_mut() {
        *amp /= branch_norm;
    }
    for amp in state.amps[half..].iter_mut() {
        *amp = Complex64::new(0.0, 0.0);
    }
    state.scale *= sigma_max * branch_norm;
    Ok(())
}

/// Full collision circuit: H, V, controlled-W1 / anti-controlled-W2, U, H,
/// then ancilla post-selection.
pub fn apply_collision(
    state: &mut QuantumState,
    fact: &CollisionFactorization,
) -> Result<(), QuantumError> {
    hadamard_ancilla(state);
    apply_occupation(state, &fact.v);
    apply_controlled_phases(state, &fact.thetas, 1, 1.0);
    apply_controlled_phases(state, &fact.thetas, 0, -1.0);
    apply_occupation(state, &fact.u);
    hadamard_ancilla(state);
    project_ancilla_zero(state, fact.sigma_max())
}

/// Controlled cyclic shifts of the position register: right movers to
/// `x + 1`, left movers to `x - 1`, rest and nonlinear slots untouched.
pub fn apply_streaming(state: &mut QuantumState) {
    let n = state.n;
    for a in 0..2 {
        let plus = (a * 4 + 1) * n;
        state.amps[plus..plus + n].rotate_right(1);
        let minus = (a * 4 + 2) * n;
        state.amps[minus..minus + n].rotate_left(1);
    }
}

/// Read the three populations back out of the statevector.  The stale
/// nonlinear slot is discarded; total mass is checked against the encoded
/// total.
pub fn decode(state: &QuantumState) -> Result<PopulationField, QuantumError> {
    let n = state.n;
    let mut field = PopulationField::uniform(n, Cell::default())
        .expect("state always has >= 2 sites");
    for x in 0..n {
        field.set(
            x,
            Cell {
                n_zero: state.raw_value(0, x).re,
                n_plus: state.raw_value(1, x).re,
                n_minus: state.raw_value(2, x).re,
            },
        );
    }
    let decoded = field.total_mass();
    let tolerance = MASS_CHECK_TOL * state.mass_checksum.abs().max(1.0);
    if (decoded - state.mass_checksum).abs() > tolerance {
        return Err(QuantumError::MassNotConserved {
            encoded: state.mass_checksum,
            decoded,
        });
    }
    Ok(field)
}

/// One full quantum step: encode, collide, stream, decode.  Also reports
/// how many cells were encoded with an out-of-range adaptive rate.
pub fn step(
    field: &PopulationField,
    params: &CollisionParams,
    fact: &CollisionFactorization,
) -> Result<(PopulationField, usize), QuantumError> {
    let warnings = adaptive_out_of_range_cells(field, params);
    let mut state = encode(field, params)?;
    apply_collision(&mut state, fact)?;
    apply_streaming(&mut state);
    Ok((decode(&state)?, warnings))
}

/// Trajectory of a quantum run.
#[derive(Clone, Debug)]
pub struct QalgaRun {
    /// Fields at t = 0..=steps.
    pub history: Vec<PopulationField>,
    /// Per-step count of cells encoded with an out-of-range adaptive rate
    /// (the classical engine would have skipped those collisions).
    pub lambda_warnings: Vec<usize>,
}

/// Run `steps` encode–collide–stream–decode cycles.  The factorization
/// depends only on `lambda_s`, so it is computed once.
pub fn run(
    initial: PopulationField,
    params: &CollisionParams,
    steps: usize,
) -> Result<QalgaRun, QuantumError> {
    let fact = factorize(params.lambda_s);
    let mut history = Vec::with_capacity(steps + 1);
    let mut warnings = Vec::with_capacity(steps);
    let mut field = initial;
    history.push(field.clone());
    for _ in 0..steps {
        let (next, warned) = step(&field, params, &fact)?;
        warnings.push(warned);
        field = next;
        history.push(field.clone());
    }
    Ok(QalgaRun { history, lambda_warnings: warnings })
}

/// Plain-text gate listing of one step's circuit, for external inspection.
///
/// Qubit indices: 0 = ancilla, 1–2 = occupation register (1 is the most
/// significant bit of the basis labels above), 3.. = position register.
/// One gate per line:
///
/// ```text
/// h <qubit>
/// u4 <q1> <q2> matrix=<16 row-major reals>      # orthogonal occupation gate
/// cphase ctrl=<qubit>:<0|1> <q1> <q2> angles=<4 reals>
/// shift+ ctrl=1:0,2:1 targets=3.. # cyclic x+1 on |01>
/// shift- ctrl=1:1,2:0 targets=3.. # cyclic x-1 on |10>
/// project <qubit>=0
/// ```
pub fn circuit_description(fact: &CollisionFactorization, n_sites: usize) -> String {
    let mut out = String::new();
    let position_qubits = n_sites.trailing_zeros();
    let targets: Vec<usize> = (3..3 + position_qubits as usize).collect();
    let fmt_matrix = |m: &[[f64; 4]; 4]| -> String {
        let mut s = String::new();
        for row in m {
            for entry in row {
                let _ = write!(s, "{entry:.17e} ");
            }
        }
        s.trim_end().into()
    };
    let fmt_angles = |a: &[f64; 4]| -> String {
        let mut s = String::new();
        for entry in a {
            let _ = write!(s, "{entry:.17e} ");
        }
        s.trim_end().into()
    };
    let _ = writeln!(out, "# collision + streaming circuit, {} qubits, sigma_max={:.17e}", 3 + position_qubits, fact.sigma_max());
    let _ = writeln!(out, "h 0");
    let _ = writeln!(out, "u4 1 2 matrix={}", fmt_matrix(&fact.v));
    let _ = writeln!(out, "cphase ctrl=0:1 1 2 angles={}", fmt_angles(&fact.thetas));
    let neg: [f64; 4] = [
        -fact.thetas[0],
        -fact.thetas[1],
        -fact.thetas[2],
        -fact.thetas[3],
    ];
    let _ = writeln!(out, "cphase ctrl=0:0 1 2 angles={}", fmt_angles(&neg));
    let _ = writeln!(out, "u4 1 2 matrix={}", fmt_matrix(&fact.u));
    let _ = writeln!(out, "h 0");
    let _ = writeln!(out, "project 0=0");
    let targets_str: String = targets
        .iter()
        .map(|t| alloc::format!("{t}"))
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(out, "shift+ ctrl=1:0,2:1 targets={targets_str}");
    let _ = writeln!(out, "shift- ctrl=1:1,2:0 targets={targets_str}");
    out
}
