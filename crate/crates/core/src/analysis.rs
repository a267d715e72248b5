//! Diagnostics connecting the engines to their continuum predictions:
//! equilibrium formulas, hydrodynamic residuals, field distances, the
//! equilibrium-measurement sweep, and the relaxation-time scan.

use alloc::vec::Vec;
use core::fmt;

use crate::adaptive::{self, CollisionParams};
use crate::lattice::{init_cosine, init_sine, Cell, PopulationField, SQRT_2};
use crate::lbm::{self, LbmParams};
use crate::monte_carlo::{self, McParams};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Populations this far below zero mark a run as unstable; smaller
/// excursions are rounding noise.
pub const NEGATIVITY_TOL: f64 = -1e-9;
/// Runs that skip more than this fraction of collision opportunities are
/// flagged as outside the relaxation regime.  Skipped cells free-stream, so
/// once the adaptive rule starts rejecting cells at the wave's own
/// velocities the dynamics no longer corresponds to any single relaxation
/// time; on the reference cosine the fraction is exactly zero up to the
/// split rate where the skip window first reaches the wave's peak velocity,
/// then jumps above 0.15, so any cutoff in between draws the same line.
pub const FROZEN_SKIP_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalysisError {
    /// `lambda_s + lambda_c` must be positive for the equilibrium formulas.
    DegenerateRates,
    /// Two fields must share a site count to be compared.
    LengthMismatch { left: usize, right: usize },
    /// The averaging window `t_start..` is empty.
    WindowOutOfRange { t_start: usize, len: usize },
    /// Residuals need at least three snapshots for a central difference.
    ShortHistory(usize),
    /// A sweep or scan was configured with out-of-range parameters.
    BadProtocol(&'static str),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::DegenerateRates => {
                write!(f, "lambda_s + lambda_c must be positive")
            }
            AnalysisError::LengthMismatch { left, right } => {
                write!(f, "fields have different site counts: {left} vs {right}")
            }
            AnalysisError::WindowOutOfRange { t_start, len } => {
                write!(f, "averaging window starts at {t_start} but history has {len} entries")
            }
            AnalysisError::ShortHistory(len) => {
                write!(f, "need at least 3 snapshots for residuals, got {len}")
            }
            AnalysisError::BadProtocol(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for AnalysisError {}

/// Equilibrium value of the energy-like moment for the split/crunch gas:
///
/// `pi_eq = rho (sqrt(2)/2) (2 lambda_s - lambda_c + 3 lambda_c |u|) / (lambda_c + lambda_s)`
///
/// Even in `u`; reduces to `rho sqrt(2)/4` when the two rates coincide and
/// `u = 0`.
pub fn theoretical_pi_eq(
    rho: f64,
    u: f64,
    lambda_s: f64,
    lambda_c: f64,
) -> Result<f64, AnalysisError> {
    let total = lambda_s + lambda_c;
    if total.is_nan() || total <= 0.0 {
        return Err(AnalysisError::DegenerateRates);
    }
    Ok(rho * (SQRT_2 / 2.0) * (2.0 * lambda_s - lambda_c + 3.0 * lambda_c * u.abs()) / total)
}

/// Equilibrium populations of the split/crunch gas, reconstructed from the
/// conserved moments and [`theoretical_pi_eq`]:
///
/// ```text
/// f_-  = -rho u / 2 + rho / 6 + sqrt(2) pi_eq / 6
/// f_0  =  2 rho / 3 - sqrt(2) pi_eq / 3
/// f_+  = +rho u / 2 + rho / 6 + sqrt(2) pi_eq / 6
/// ```
///
/// Mass and momentum hold by construction; the cell is a fixed point of the
/// split/crunch collision whenever all three entries are non-negative.
pub fn theoretical_feq(
    rho: f64,
    u: f64,
    lambda_s: f64,
    lambda_c: f64,
) -> Result<Cell, AnalysisError> {
    let pi = theoretical_pi_eq(rho, u, lambda_s, lambda_c)?;
    let symmetric = rho / 6.0 + SQRT_2 * pi / 6.0;
    let half_momentum = rho * u / 2.0;
    Ok(Cell {
        n_minus: symmetric - half_momentum,
        n_zero: 2.0 * rho / 3.0 - SQRT_2 * pi / 3.0,
        n_plus: symmetric + half_momentum,
    })
}

/// Leading-order pressure of the split/crunch gas,
///
/// `P0 = rho/3 + (3 lambda_c |rho u| + 2 lambda_s rho - lambda_c rho) / (3 (lambda_c + lambda_s))`,
///
/// equal to the second velocity moment `f_- + f_+` of [`theoretical_feq`].
pub fn pressure_term(
    rho: f64,
    rho_u: f64,
    lambda_s: f64,
    lambda_c: f64,
) -> Result<f64, AnalysisError> {
    let total = lambda_s + lambda_c;
    if total.is_nan() || total <= 0.0 {
        return Err(AnalysisError::DegenerateRates);
    }
    Ok(rho / 3.0
        + (3.0 * lambda_c * rho_u.abs() + 2.0 * lambda_s * rho - lambda_c * rho) / (3.0 * total))
}

/// RMS residuals of the hydrodynamic equations evaluated on a trajectory
/// with unit lattice spacing.
#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    /// Site count of the underlying run.
    pub resolution: usize,
    /// RMS of `d rho/dt + d(rho u)/dx`.
    pub r_mass: f64,
    /// RMS of `d(rho u)/dt + ws d rho/dx + wc d|rho u|/dx` with the rate
    /// weights `ws = lambda_s/(lambda_s+lambda_c)`, `wc = 1 - ws`.
    pub r_momentum: f64,
    /// RMS of the next-order mass equation
    /// `d2 rho/dt2 + 2 d2(rho u)/dtdx + ws d2 rho/dx2 + wc d2|rho u|/dx2`,
    /// interior times only.  Reported for inspection; no convergence claim
    /// is attached to it.
    pub r_mass_second: f64,
    /// RMS of the next-order momentum equation
    /// `d2(rho u)/dt2 + 2 (ws d2 rho/dtdx + wc d2|rho u|/dtdx) + d2(rho u)/dx2`.
    pub r_momentum_second: f64,
}

/// Evaluate the continuum equations on a recorded trajectory by finite
/// differences: central in space (periodic), central in time with one-sided
/// stencils at the two ends.  The trajectory should come from a run with
/// constant rates; the rate weights enter the momentum flux.
pub fn chapman_residual(
    history: &[PopulationField],
    lambda_s: f64,
    lambda_c: f64,
) -> Result<ResidualReport, AnalysisError> {
    let steps = history.len();
    if steps < 3 {
        return Err(AnalysisError::ShortHistory(steps));
    }
    let total = lambda_s + lambda_c;
    if total.is_nan() || total <= 0.0 {
        return Err(AnalysisError::DegenerateRates);
    }
    let ws = lambda_s / total;
    let wc = lambda_c / total;
    let n = history[0].len();
    for field in history {
        if field.len() != n {
            return Err(AnalysisError::LengthMismatch { left: n, right: field.len() });
        }
    }

    // Scalar snapshots of the three fields the equations involve.
    let rho: Vec<Vec<f64>> = history
        .iter()
        .map(|f| f.cells().map(|c| c.rho()).collect())
        .collect();
    let mom: Vec<Vec<f64>> = history
        .iter()
        .map(|f| f.cells().map(|c| c.momentum()).collect())
        .collect();

    let dx = |series: &[f64], x: usize| (series[(x + 1) % n] - series[(x + n - 1) % n]) / 2.0;
    let dxx = |series: &[f64], x: usize| {
        series[(x + 1) % n] - 2.0 * series[x] + series[(x + n - 1) % n]
    };

    let mut mass_sq = 0.0;
    let mut mom_sq = 0.0;
    for t in 0..steps {
        for x in 0..n {
            let d_rho_dt = if t == 0 {
                rho[1][x] - rho[0][x]
            } else if t == steps - 1 {
                rho[t][x] - rho[t - 1][x]
            } else {
                (rho[t + 1][x] - rho[t - 1][x]) / 2.0
            };
            let d_mom_dt = if t == 0 {
                mom[1][x] - mom[0][x]
            } else if t == steps - 1 {
                mom[t][x] - mom[t - 1][x]
            } else {
                (mom[t + 1][x] - mom[t - 1][x]) / 2.0
            };
            let d_abs_dx = ((mom[t][(x + 1) % n]).abs() - (mom[t][(x + n - 1) % n]).abs()) / 2.0;
            mass_sq += (d_rho_dt + dx(&mom[t], x)) * (d_rho_dt + dx(&mom[t], x));
            let r = d_mom_dt + ws * dx(&rho[t], x) + wc * d_abs_dx;
            mom_sq += r * r;
        }
    }
    let count = (steps * n) as f64;
    let r_mass = (mass_sq / count).sqrt();
    let r_momentum = (mom_sq / count).sqrt();

    // Next order: pure second differences, interior times only.
    let mut mass2_sq = 0.0;
    let mut mom2_sq = 0.0;
    for t in 1..steps - 1 {
        for x in 0..n {
            let xm = (x + n - 1) % n;
            let xp = (x + 1) % n;
            let dtt_rho = rho[t + 1][x] - 2.0 * rho[t][x] + rho[t - 1][x];
            let dtt_mom = mom[t + 1][x] - 2.0 * mom[t][x] + mom[t - 1][x];
            let dtx_mom = (mom[t + 1][xp] - mom[t + 1][xm] - mom[t - 1][xp] + mom[t - 1][xm]) / 4.0;
            let dtx_rho = (rho[t + 1][xp] - rho[t + 1][xm] - rho[t - 1][xp] + rho[t - 1][xm]) / 4.0;
            let dtx_abs = (mom[t + 1][xp].abs() - mom[t + 1][xm].abs() - mom[t - 1][xp].abs()
                + mom[t - 1][xm].abs())
                / 4.0;
            let dxx_abs = mom[t][xp].abs() - 2.0 * mom[t][x].abs() + mom[t][xm].abs();
            let r_mass2 = dtt_rho + 2.0 * dtx_mom + ws * dxx(&rho[t], x) + wc * dxx_abs;
            let r_mom2 = dtt_mom + 2.0 * (ws * dtx_rho + wc * dtx_abs) + dxx(&mom[t], x);
            mass2_sq += r_mass2 * r_mass2;
            mom2_sq += r_mom2 * r_mom2;
        }
    }
    let count2 = ((steps - 2) * n) as f64;
    Ok(ResidualReport {
        resolution: n,
        r_mass,
        r_momentum,
        r_mass_second: (mass2_sq / count2).sqrt(),
        r_momentum_second: (mom2_sq / count2).sqrt(),
    })
}

/// Mean absolute per-site differences of two fields' conserved densities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldDistance {
    pub mass: f64,
    pub momentum: f64,
}

impl FieldDistance {
    /// Combined objective used by the relaxation-time scan.
    pub fn total(&self) -> f64 {
        self.mass + self.momentum
    }
}

pub fn field_distance(
    a: &PopulationField,
    b: &PopulationField,
) -> Result<FieldDistance, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len() as f64;
    let mut mass = 0.0;
    let mut momentum = 0.0;
    for (ca, cb) in a.cells().zip(b.cells()) {
        mass += (ca.rho() - cb.rho()).abs();
        momentum += (ca.momentum() - cb.momentum()).abs();
    }
    Ok(FieldDistance { mass: mass / n, momentum: momentum / n })
}

/// Time-averaged global state of a trajectory window.
#[derive(Clone, Copy, Debug)]
pub struct EquilibriumRecord {
    /// Global mean velocity: summed momentum over summed mass.
    pub u_x: f64,
    /// Mean site density over the window.
    pub rho_mean: f64,
    /// Per-site time-averaged populations, ordered (minus, zero, plus).
    pub f_avg: [f64; 3],
    /// Batch-means standard error of each `f_avg` entry (10 batches), a
    /// drop-in scale for statistical comparisons on stochastic engines.
    pub f_sem: [f64; 3],
}

fn batch_standard_error(series: &[f64]) -> f64 {
    let batches = series.len().min(10);
    if batches < 2 {
        return 0.0;
    }
    let per = series.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Average the tail `history[t_start..]` of a trajectory into one record.
pub fn measure_equilibrium(
    history: &[PopulationField],
    t_start: usize,
) -> Result<EquilibriumRecord, AnalysisError> {
    if t_start >= history.len() {
        return Err(AnalysisError::WindowOutOfRange { t_start, len: history.len() });
    }
    let window = &history[t_start..];
    let n = window[0].len() as f64;
    let mut mass_sum = 0.0;
    let mut momentum_sum = 0.0;
    let mut series = [Vec::new(), Vec::new(), Vec::new()];
    for field in window {
        mass_sum += field.total_mass();
        momentum_sum += field.total_momentum();
        let mut totals = [0.0; 3];
        for cell in field.cells() {
            totals[0] += cell.n_minus;
            totals[1] += cell.n_zero;
            totals[2] += cell.n_plus;
        }
        for (s, total) in series.iter_mut().zip(totals) {
            s.push(total / n);
        }
    }
    let frames = window.len() as f64;
    let f_avg = [
        series[0].iter().sum::<f64>() / frames,
        series[1].iter().sum::<f64>() / frames,
        series[2].iter().sum::<f64>() / frames,
    ];
    let f_sem = [
        batch_standard_error(&series[0]),
        batch_standard_error(&series[1]),
        batch_standard_error(&series[2]),
    ];
    Ok(EquilibriumRecord {
        u_x: if mass_sum > 0.0 { momentum_sum / mass_sum } else { 0.0 },
        rho_mean: mass_sum / frames / n,
        f_avg,
        f_sem,
    })
}

/// Engine selector for [`equilibrium_sweep`], each paired with the theory
/// curve it is expected to track.
#[derive(Clone, Copy, Debug)]
pub enum SweepEngine {
    /// Split/crunch gas at constant rates; theory = [`theoretical_feq`].
    AdaptiveConstant { lambda_c: f64 },
    /// Split/crunch gas with the locally adapted crunch rate; theory =
    /// [`lbm::equilibrium`].
    AdaptiveLocal,
    /// Pairwise Monte Carlo gas; theory = [`monte_carlo::equilibrium_theory`].
    MonteCarlo { attempts_per_cell: u32, seed: u64 },
}

/// Shared sweep protocol: a half-sine mass profile with a uniform velocity
/// bias is run to equilibrium for each bias on a descending grid, and the
/// tail of each run is averaged.
#[derive(Clone, Copy, Debug)]
pub struct SweepProtocol {
    pub sites: usize,
    pub n_max: f64,
    pub lambda_s: f64,
    pub p_zero: f64,
    pub steps: usize,
    pub t_start: usize,
    pub momentum_points: usize,
    /// Round populations to integers (initial field and collision
    /// transfers).  Off by default, matching the real-valued storage
    /// default; the Monte Carlo engine always rounds the initial field.
    pub integer_cast: bool,
}

impl Default for SweepProtocol {
    fn default() -> Self {
        Self {
            sites: 200,
            n_max: 500.0,
            lambda_s: 0.2,
            p_zero: 0.2,
            steps: 2000,
            t_start: 1600,
            momentum_points: 20,
            integer_cast: false,
        }
    }
}

/// One sweep measurement with its engine-matched theory prediction,
/// evaluated at the measured `(rho_mean, u_x)`.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub u_bias: f64,
    pub record: EquilibriumRecord,
    pub theory: Cell,
}

/// Velocity-bias grid `U_m = 1 - m / points` for `m = 1..=points`,
/// descending from near 1 to exactly 0.
pub fn sweep_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|m| 1.0 - m as f64 / points as f64).collect()
}

/// Run the equilibrium-measurement protocol over the velocity-bias grid.
pub fn equilibrium_sweep(
    engine: SweepEngine,
    proto: &SweepProtocol,
) -> Result<Vec<SweepPoint>, AnalysisError> {
    if proto.t_start > proto.steps {
        return Err(AnalysisError::BadProtocol("averaging window starts past the end of the run"));
    }
    let mut points = Vec::with_capacity(proto.momentum_points);
    for u_bias in sweep_grid(proto.momentum_points) {
        let mut field = init_sine(proto.sites, proto.n_max, u_bias, proto.p_zero)
            .map_err(|_| AnalysisError::BadProtocol("invalid sweep initial condition"))?;
        let needs_integers =
            proto.integer_cast || matches!(engine, SweepEngine::MonteCarlo { .. });
        if needs_integers {
            field.round_to_integers();
        }
        let history = match engine {
            SweepEngine::AdaptiveConstant { lambda_c } => {
                let params = CollisionParams::constant(proto.lambda_s, lambda_c)
                    .map_err(|_| AnalysisError::BadProtocol("collision rates outside [0,1]"))?
                    .with_integer_cast(proto.integer_cast);
                adaptive::run(field, &params, proto.steps).history
            }
            SweepEngine::AdaptiveLocal => {
                let params = CollisionParams::local_lbm(proto.lambda_s)
                    .map_err(|_| AnalysisError::BadProtocol("split rate outside [0,1]"))?
                    .with_integer_cast(proto.integer_cast);
                adaptive::run(field, &params, proto.steps).history
            }
            SweepEngine::MonteCarlo { attempts_per_cell, seed } => {
                let params = McParams::new(proto.lambda_s, attempts_per_cell, seed)
                    .map_err(|_| AnalysisError::BadProtocol("acceptance probability outside [0,1]"))?;
                monte_carlo::run(field, &params, proto.steps)
            }
        };
        let record = measure_equilibrium(&history, proto.t_start)?;
        let theory = match engine {
            SweepEngine::AdaptiveConstant { lambda_c } => {
                theoretical_feq(record.rho_mean, record.u_x, proto.lambda_s, lambda_c)?
            }
            SweepEngine::AdaptiveLocal => lbm::equilibrium(record.rho_mean, record.u_x),
            SweepEngine::MonteCarlo { .. } => {
                monte_carlo::equilibrium_theory(record.rho_mean, record.u_x)
            }
        };
        points.push(SweepPoint { u_bias, record, theory });
    }
    Ok(points)
}

/// Protocol for the relaxation-time correspondence scan: for each split
/// rate, find the BGK relaxation time whose cosine-bump trajectory best
/// matches the locally adapted gas at a fixed snapshot.
#[derive(Clone, Debug)]
pub struct TauScanProtocol {
    pub sites: usize,
    pub n_max: f64,
    pub steps: usize,
    pub snapshot: usize,
    pub lambda_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
}

impl Default for TauScanProtocol {
    fn default() -> Self {
        Self {
            sites: 512,
            n_max: 200.0,
            steps: 500,
            snapshot: 450,
            lambda_grid: (1..=20).map(|k| k as f64 * 0.05).collect(),
            tau_grid: (1..=80).map(|k| k as f64 * 0.25).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TauScanRow {
    pub lambda_s: f64,
    /// Relaxation time minimizing [`FieldDistance::total`] at the snapshot.
    pub best_tau: f64,
    pub distance_mass: f64,
    pub distance_momentum: f64,
    /// `false` when the adaptive run went non-finite, went negative beyond
    /// [`NEGATIVITY_TOL`], or skipped more than [`FROZEN_SKIP_FRACTION`] of
    /// its collision opportunities (partially or fully free-streaming, so no
    /// relaxation time describes it).
    pub stable: bool,
}

/// Reference BGK snapshots, one per grid relaxation time.  Shared across
/// scan rows since they do not depend on the split rate.
pub fn lbm_snapshots(
    proto: &TauScanProtocol,
) -> Result<Vec<(f64, PopulationField)>, AnalysisError> {
    if proto.snapshot > proto.steps {
        return Err(AnalysisError::BadProtocol("snapshot index past the end of the run"));
    }
    let init = init_cosine(proto.sites, proto.n_max)
        .map_err(|_| AnalysisError::BadProtocol("invalid scan initial condition"))?;
    let mut out = Vec::with_capacity(proto.tau_grid.len());
    for &tau in &proto.tau_grid {
        let params = LbmParams::new(tau)
            .map_err(|_| AnalysisError::BadProtocol("relaxation time must be positive"))?;
        let history = lbm::run(init.clone(), &params, proto.snapshot);
        out.push((tau, history[proto.snapshot].clone()));
    }
    Ok(out)
}

/// Scan one split rate against precomputed BGK snapshots.
pub fn tau_scan_row(
    lambda_s: f64,
    proto: &TauScanProtocol,
    references: &[(f64, PopulationField)],
) -> Result<TauScanRow, AnalysisError> {
    if references.is_empty() {
        return Err(AnalysisError::BadProtocol("empty relaxation-time grid"));
    }
    let params = CollisionParams::local_lbm(lambda_s)
        .map_err(|_| AnalysisError::BadProtocol("split rate outside [0,1]"))?;
    let init = init_cosine(proto.sites, proto.n_max)
        .map_err(|_| AnalysisError::BadProtocol("invalid scan initial condition"))?;
    let run = adaptive::run(init, &params, proto.steps);
    let snapshot = &run.history[proto.snapshot];
    let wholesome = run
        .history
        .iter()
        .all(|f| f.all_finite() && f.min_population() >= NEGATIVITY_TOL);
    let stable = wholesome && run.skip_fraction() <= FROZEN_SKIP_FRACTION;

    let mut best: Option<(f64, FieldDistance)> = None;
    for (tau, reference) in references {
        let distance = if reference.all_finite() {
            field_distance(snapshot, reference)?
        } else {
            FieldDistance { mass: f64::INFINITY, momentum: f64::INFINITY }
        };
        let better = match &best {
            None => true,
            Some((_, incumbent)) => distance.total() < incumbent.total(),
        };
        if better {
            best = Some((*tau, distance));
        }
    }
    let (best_tau, distance) = best.expect("non-empty reference grid");
    Ok(TauScanRow {
        lambda_s,
        best_tau,
        distance_mass: distance.mass,
        distance_momentum: distance.momentum,
        stable,
    })
}

/// Full scan over the split-rate grid.  Sequential; callers that want
/// parallelism can fan out over [`tau_scan_row`] with shared
/// [`lbm_snapshots`].
pub fn tau_scan(proto: &TauScanProtocol) -> Result<Vec<TauScanRow>, AnalysisError> {
    if proto.lambda_grid.is_empty() {
        return Ok(Vec::new());
    }
    let references = lbm_snapshots(proto)?;
    proto
        .lambda_grid
        .iter()
        .map(|&lambda_s| tau_scan_row(lambda_s, proto, &references))
        .collect()
}

/// Smooth travelling-wave initial condition for residual studies: BGK
/// equilibrium populations on `rho(x) = rho0 + amplitude cos(2 pi x / N)`
/// with a uniform positive velocity (keeps `|rho u|` smooth).
pub fn smooth_wave_field(
    n: usize,
    rho0: f64,
    amplitude: f64,
    u0: f64,
) -> Result<PopulationField, AnalysisError> {
    if rho0 <= amplitude.abs() {
        return Err(AnalysisError::BadProtocol("wave amplitude must stay below the mean density"));
    }
    let mut field = PopulationField::uniform(n, Cell::default())
        .map_err(|_| AnalysisError::BadProtocol("need at least two sites"))?;
    for x in 0..n {
        let rho = rho0 + amplitude * (2.0 * core::f64::consts::PI * x as f64 / n as f64).cos();
        field.set(x, lbm::equilibrium(rho, u0));
    }
    Ok(field)
}
