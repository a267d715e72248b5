//! Experiment harness for the one-dimensional three-velocity lattice gas.
//!
//! Three subcommands cover the desk-scale experiments:
//!
//! * `run` drives one engine from a chosen initial condition and writes
//!   per-snapshot lattice profiles plus a conserved-quantity log;
//! * `equilibrium-sweep` measures late-time population averages against
//!   their closed-form predictions over a grid of velocity biases;
//! * `tau-scan` fits the best BGK relaxation time to the adaptive gas for
//!   each split rate on a grid.
//!
//! Every setting can come from a flat `key = value` config file
//! (`--config`), from a command-line flag (which wins), or from a default.
//! Outputs are CSV with headers and full-precision floats.  The exit code
//! is zero only when all requested files were written and the conserved
//! quantities stayed put.

mod config;
mod output;

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lga_core::adaptive::{self, CollisionParams};
use lga_core::analysis::{
    self, SweepEngine, SweepProtocol, TauScanProtocol, TauScanRow, NEGATIVITY_TOL,
};
use lga_core::lattice::{init_cosine, init_sine, PopulationField};
use lga_core::lbm::{self, LbmParams};
use lga_core::monte_carlo::{self, McParams};
use lga_core::quantum;
use rayon::prelude::*;

use config::{Engine, InitProfile, Settings, TimeList};

/// Relative drift in total mass or momentum beyond which a run fails its
/// conservation check (and the process exits nonzero).
const CONSERVATION_TOL: f64 = 1e-9;

/// Environment variable naming the worker-thread count for parallel scans.
const THREADS_VAR: &str = "LGA_THREADS";

#[derive(Parser)]
#[command(
    name = "lga",
    about = "One-dimensional three-velocity lattice-gas laboratory",
    version
)]
struct Cli {
    /// Flat key=value config file; command-line flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step one engine and write lattice profiles.
    Run(RunArgs),
    /// Measure equilibria over a velocity-bias grid.
    EquilibriumSweep(SweepArgs),
    /// Fit BGK relaxation times to the adaptive gas.
    TauScan(ScanArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Engine: alga-const, alga-adaptive, lbm, mclga, or qalga.
    #[arg(long)]
    engine: Option<Engine>,
    /// Ring size (>= 2; a power of two for qalga).
    #[arg(long)]
    sites: Option<usize>,
    /// Number of collide-stream steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Initial condition: sine (biased half-wave) or cosine (resting wave).
    #[arg(long)]
    init: Option<InitProfile>,
    /// Peak of the initial density envelope.
    #[arg(long)]
    n_max: Option<f64>,
    /// Velocity bias of the sine profile, in [-1, 1].
    #[arg(long)]
    u_bias: Option<f64>,
    /// Rest-population fraction of the sine profile, in [0, 1].
    #[arg(long)]
    p_zero: Option<f64>,
    /// Split rate of the split/crunch engines, in [0, 1].
    #[arg(long)]
    lambda_s: Option<f64>,
    /// Constant crunch rate; defaults to lambda_s.  Giving it to qalga
    /// selects the constant-rate collision instead of the adaptive one.
    #[arg(long)]
    lambda_c: Option<f64>,
    /// BGK relaxation time (lbm only), > 0.
    #[arg(long)]
    tau: Option<f64>,
    /// Crunch acceptance probability of the Monte Carlo gas, in [0, 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Seed of the Monte Carlo counter generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo collision attempts per cell per step; defaults to half
    /// the mean site density, rounded up.
    #[arg(long)]
    attempts_per_cell: Option<u32>,
    /// Round populations to whole counts (split/crunch engines only).
    #[arg(long)]
    integer: Option<bool>,
    /// Comma-separated snapshot times, each in 0..=steps.
    #[arg(long)]
    snapshots: Option<TimeList>,
    /// Directory receiving profile_t{t}.csv and conserved.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Also write a one-step gate listing to this file (qalga only).
    #[arg(long)]
    circuit_file: Option<PathBuf>,
}

const RUN_KEYS: &[&str] = &[
    "engine",
    "sites",
    "steps",
    "init",
    "n_max",
    "u_bias",
    "p_zero",
    "lambda_s",
    "lambda_c",
    "tau",
    "lambda",
    "seed",
    "attempts_per_cell",
    "integer",
    "snapshots",
    "output_dir",
    "circuit_file",
];

#[derive(Args)]
struct SweepArgs {
    /// Engine: alga-const, alga-adaptive, or mclga.
    #[arg(long)]
    engine: Option<Engine>,
    /// Ring size of the sweep runs.
    #[arg(long)]
    sites: Option<usize>,
    /// Peak of the half-sine density envelope.
    #[arg(long)]
    n_max: Option<f64>,
    /// Split rate (also the Monte Carlo acceptance probability).
    #[arg(long)]
    lambda_s: Option<f64>,
    /// Constant crunch rate for alga-const; defaults to lambda_s.
    #[arg(long)]
    lambda_c: Option<f64>,
    /// Rest-population fraction of the initial profile.
    #[arg(long)]
    p_zero: Option<f64>,
    /// Steps per velocity-bias point.
    #[arg(long)]
    steps: Option<usize>,
    /// First step of the late-time averaging window.
    #[arg(long)]
    t_start: Option<usize>,
    /// Number of velocity-bias grid points.
    #[arg(long)]
    momentum_points: Option<usize>,
    /// Round populations to whole counts throughout.
    #[arg(long)]
    integer: Option<bool>,
    /// Monte Carlo collision attempts per cell per step; defaults to half
    /// the mean site density, rounded up.
    #[arg(long)]
    attempts_per_cell: Option<u32>,
    /// Seed of the Monte Carlo counter generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving equilibrium_sweep.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

const SWEEP_KEYS: &[&str] = &[
    "engine",
    "sites",
    "n_max",
    "lambda_s",
    "lambda_c",
    "p_zero",
    "steps",
    "t_start",
    "momentum_points",
    "integer",
    "attempts_per_cell",
    "seed",
    "output_dir",
];

#[derive(Args)]
struct ScanArgs {
    /// Ring size of the scan runs.
    #[arg(long)]
    sites: Option<usize>,
    /// Peak of the cosine density envelope.
    #[arg(long)]
    n_max: Option<f64>,
    /// Steps per run.
    #[arg(long)]
    steps: Option<usize>,
    /// Time index at which adaptive and BGK fields are compared.
    #[arg(long)]
    snapshot: Option<usize>,
    /// Number of split-rate grid points on (0, lambda_max].
    #[arg(long)]
    lambda_points: Option<usize>,
    /// Upper end of the split-rate grid.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Number of relaxation-time grid points on (0, tau_max].
    #[arg(long)]
    tau_points: Option<usize>,
    /// Upper end of the relaxation-time grid.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Directory receiving tau_scan.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

const SCAN_KEYS: &[&str] = &[
    "sites",
    "n_max",
    "steps",
    "snapshot",
    "lambda_points",
    "lambda_max",
    "tau_points",
    "tau_max",
    "output_dir",
];

fn main() {
    if let Err(err) = try_main() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn try_main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Run(args) => {
            let settings = Settings::load(cli.config.as_deref(), RUN_KEYS)?;
            run_command(&settings, args)
        }
        Command::EquilibriumSweep(args) => {
            let settings = Settings::load(cli.config.as_deref(), SWEEP_KEYS)?;
            sweep_command(&settings, args)
        }
        Command::TauScan(args) => {
            let settings = Settings::load(cli.config.as_deref(), SCAN_KEYS)?;
            scan_command(&settings, args)
        }
    }
}

/// Honor `LGA_THREADS` for the global worker pool; default to rayon's own
/// sizing when unset.
fn configure_threads() -> Result<()> {
    match std::env::var(THREADS_VAR) {
        Ok(raw) => {
            let threads: usize = raw
                .parse()
                .map_err(|_| anyhow!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
            if threads == 0 {
                bail!("{THREADS_VAR} must be a positive integer, got '0'");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("cannot configure the worker-thread pool")
        }
        Err(_) => Ok(()),
    }
}

fn run_command(settings: &Settings, args: RunArgs) -> Result<()> {
    let engine: Engine = settings.require("engine", args.engine)?;
    let sites = settings.resolve("sites", args.sites, 512)?;
    let steps = settings.resolve("steps", args.steps, 500)?;
    let init = settings.resolve("init", args.init, InitProfile::Cosine)?;
    let n_max = settings.resolve("n_max", args.n_max, 200.0)?;
    let u_bias = settings.resolve("u_bias", args.u_bias, 0.0)?;
    let p_zero = settings.resolve("p_zero", args.p_zero, 0.2)?;
    let lambda_s = settings.resolve("lambda_s", args.lambda_s, 0.2)?;
    let lambda_c: Option<f64> = settings.optional("lambda_c", args.lambda_c)?;
    let tau = settings.resolve("tau", args.tau, 1.0)?;
    let lambda = settings.resolve("lambda", args.lambda, 0.2)?;
    let seed = settings.resolve("seed", args.seed, 42)?;
    let integer = settings.resolve("integer", args.integer, false)?;
    let snapshots = settings.resolve("snapshots", args.snapshots, TimeList(vec![0, steps]))?;
    let output_dir: PathBuf = settings.require("output_dir", args.output_dir)?;
    let circuit_file: Option<PathBuf> = settings.optional("circuit_file", args.circuit_file)?;

    if sites < 2 {
        bail!("sites must be at least 2, got {sites}");
    }
    if engine == Engine::Qalga && !sites.is_power_of_two() {
        bail!("qalga needs a power-of-two ring so positions fill a qubit register; got {sites}");
    }
    if let Some(&last) = snapshots.0.last() {
        if last > steps {
            bail!("snapshot time {last} is past the end of the run (steps = {steps})");
        }
    }
    if integer && matches!(engine, Engine::Lbm | Engine::Qalga) {
        bail!("integer casting is only available on the split/crunch and Monte Carlo engines");
    }
    if circuit_file.is_some() && engine != Engine::Qalga {
        bail!("--circuit-file only applies to the qalga engine");
    }

    let mut field = match init {
        InitProfile::Sine => init_sine(sites, n_max, u_bias, p_zero),
        InitProfile::Cosine => init_cosine(sites, n_max),
    }
    .map_err(|e| anyhow!("invalid initial condition: {e}"))?;
    if integer || engine == Engine::Mclga {
        field.round_to_integers();
    }

    let mean_density = field.total_mass() / sites as f64;
    let default_attempts = (mean_density / 2.0).ceil().max(1.0) as u32;
    let attempts = settings.resolve("attempts_per_cell", args.attempts_per_cell, default_attempts)?;

    let mut notes: Vec<String> = Vec::new();
    let history: Vec<PopulationField> = match engine {
        Engine::AlgaConst => {
            let params = CollisionParams::constant(lambda_s, lambda_c.unwrap_or(lambda_s))
                .map_err(|e| anyhow!("invalid rates: {e}"))?
                .with_integer_cast(integer);
            adaptive::run(field, &params, steps).history
        }
        Engine::AlgaAdaptive => {
            let params = CollisionParams::local_lbm(lambda_s)
                .map_err(|e| anyhow!("invalid rates: {e}"))?
                .with_integer_cast(integer);
            let run = adaptive::run(field, &params, steps);
            if run.skip_fraction() > 0.0 {
                notes.push(format!(
                    "adaptive crunch rate out of range on {:.3} of collision opportunities (cells streamed freely)",
                    run.skip_fraction()
                ));
            }
            run.history
        }
        Engine::Lbm => {
            let params = LbmParams::new(tau).map_err(|e| anyhow!("invalid relaxation time: {e}"))?;
            lbm::run(field, &params, steps)
        }
        Engine::Mclga => {
            let params = McParams::new(lambda, attempts, seed)
                .map_err(|e| anyhow!("invalid acceptance probability: {e}"))?;
            monte_carlo::run(field, &params, steps)
        }
        Engine::Qalga => {
            let params = match lambda_c {
                Some(rate) => CollisionParams::constant(lambda_s, rate),
                None => CollisionParams::local_lbm(lambda_s),
            }
            .map_err(|e| anyhow!("invalid rates: {e}"))?;
            let run = quantum::run(field, &params, steps)
                .map_err(|e| anyhow!("quantum engine failed: {e}"))?;
            let warned: usize = run.lambda_warnings.iter().sum();
            if warned > 0 {
                notes.push(format!(
                    "{warned} cell encodings used the free-streaming form (adaptive rate out of range)"
                ));
            }
            if let Some(path) = &circuit_file {
                let fact = quantum::factorize(lambda_s);
                output::write_circuit(path, &quantum::circuit_description(&fact, sites))?;
                println!("wrote {}", path.display());
            }
            run.history
        }
    };

    for (t, state) in history.iter().enumerate() {
        if !state.all_finite() {
            bail!("engine instability: non-finite populations at t = {t}");
        }
        if state.min_population() < NEGATIVITY_TOL {
            bail!(
                "engine instability: population {:.3e} below zero at t = {t}",
                state.min_population()
            );
        }
    }

    for &t in &snapshots.0 {
        let path = output::write_profile(&output_dir, t, &history[t])?;
        println!("wrote {}", path.display());
    }
    let path = output::write_conserved(&output_dir, &history)?;
    println!("wrote {}", path.display());
    for note in &notes {
        println!("note: {note}");
    }

    let mass0 = history[0].total_mass();
    let momentum0 = history[0].total_momentum();
    let scale = mass0.abs().max(1.0);
    let mut worst: f64 = 0.0;
    for state in &history {
        worst = worst
            .max((state.total_mass() - mass0).abs() / scale)
            .max((state.total_momentum() - momentum0).abs() / scale);
    }
    if worst > CONSERVATION_TOL {
        bail!(
            "conservation check failed: relative drift {worst:.3e} exceeds {CONSERVATION_TOL:.0e}"
        );
    }
    println!("conservation: ok (max relative drift {worst:.3e})");
    Ok(())
}

fn sweep_command(settings: &Settings, args: SweepArgs) -> Result<()> {
    let engine: Engine = settings.require("engine", args.engine)?;
    let defaults = SweepProtocol::default();
    let lambda_s = settings.resolve("lambda_s", args.lambda_s, defaults.lambda_s)?;
    let proto = SweepProtocol {
        sites: settings.resolve("sites", args.sites, defaults.sites)?,
        n_max: settings.resolve("n_max", args.n_max, defaults.n_max)?,
        lambda_s,
        p_zero: settings.resolve("p_zero", args.p_zero, defaults.p_zero)?,
        steps: settings.resolve("steps", args.steps, defaults.steps)?,
        t_start: settings.resolve("t_start", args.t_start, defaults.t_start)?,
        momentum_points: settings.resolve(
            "momentum_points",
            args.momentum_points,
            defaults.momentum_points,
        )?,
        integer_cast: settings.resolve("integer", args.integer, defaults.integer_cast)?,
    };
    let output_dir: PathBuf = settings.require("output_dir", args.output_dir)?;

    let sweep_engine = match engine {
        Engine::AlgaConst => SweepEngine::AdaptiveConstant {
            lambda_c: settings.resolve("lambda_c", args.lambda_c, lambda_s)?,
        },
        Engine::AlgaAdaptive => SweepEngine::AdaptiveLocal,
        Engine::Mclga => {
            let resting = init_sine(proto.sites, proto.n_max, 0.0, proto.p_zero)
                .map_err(|e| anyhow!("invalid sweep profile: {e}"))?;
            let mean_density = resting.total_mass() / proto.sites as f64;
            let default_attempts = (mean_density / 2.0).ceil().max(1.0) as u32;
            SweepEngine::MonteCarlo {
                attempts_per_cell: settings.resolve(
                    "attempts_per_cell",
                    args.attempts_per_cell,
                    default_attempts,
                )?,
                seed: settings.resolve("seed", args.seed, 42)?,
            }
        }
        Engine::Lbm | Engine::Qalga => {
            bail!("equilibrium sweeps drive alga-const, alga-adaptive, or mclga; got {engine}")
        }
    };

    let points = analysis::equilibrium_sweep(sweep_engine, &proto)
        .map_err(|e| anyhow!("sweep failed: {e}"))?;
    let path = output::write_sweep(&output_dir, &points)?;
    println!("wrote {} ({} points)", path.display(), points.len());
    Ok(())
}

fn scan_command(settings: &Settings, args: ScanArgs) -> Result<()> {
    let defaults = TauScanProtocol::default();
    let lambda_points = settings.resolve("lambda_points", args.lambda_points, 20)?;
    let lambda_max = settings.resolve("lambda_max", args.lambda_max, 1.0)?;
    let tau_points = settings.resolve("tau_points", args.tau_points, 80)?;
    let tau_max = settings.resolve("tau_max", args.tau_max, 20.0)?;
    if lambda_points == 0 || tau_points == 0 {
        bail!("lambda_points and tau_points must be positive");
    }
    let grid = |points: usize, max: f64| -> Vec<f64> {
        (1..=points).map(|k| k as f64 * max / points as f64).collect()
    };
    let proto = TauScanProtocol {
        sites: settings.resolve("sites", args.sites, defaults.sites)?,
        n_max: settings.resolve("n_max", args.n_max, defaults.n_max)?,
        steps: settings.resolve("steps", args.steps, defaults.steps)?,
        snapshot: settings.resolve("snapshot", args.snapshot, defaults.snapshot)?,
        lambda_grid: grid(lambda_points, lambda_max),
        tau_grid: grid(tau_points, tau_max),
    };
    let output_dir: PathBuf = settings.require("output_dir", args.output_dir)?;

    let references =
        analysis::lbm_snapshots(&proto).map_err(|e| anyhow!("reference runs failed: {e}"))?;
    let rows: Vec<TauScanRow> = proto
        .lambda_grid
        .par_iter()
        .map(|&lambda_s| analysis::tau_scan_row(lambda_s, &proto, &references))
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("scan failed: {e}"))?;

    let path = output::write_tau_scan(&output_dir, &rows)?;
    let stable = rows.iter().filter(|r| r.stable).count();
    println!("wrote {} ({} rows, {stable} stable)", path.display(), rows.len());
    Ok(())
}
