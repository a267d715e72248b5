//! CSV writers for the experiment harness.
//!
//! Every file gets a header row, LF line endings, and floats printed with
//! 17 significant digits so a run can be reproduced bit-for-bit from its
//! own output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lga_core::analysis::{SweepPoint, TauScanRow};
use lga_core::lattice::PopulationField;

/// Format a float with enough digits to round-trip f64 exactly.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create output directory {}", parent.display()))?;
    }
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

/// Write one lattice snapshot as `profile_t{t}.csv` under `dir`.
///
/// Columns: time index, site index, the three populations, density, and
/// momentum density.
pub fn write_profile(dir: &Path, t: usize, field: &PopulationField) -> Result<PathBuf> {
    let mut text = String::from("t,x,n_minus,n_zero,n_plus,rho,rho_u\n");
    for (x, cell) in field.cells().enumerate() {
        let _ = writeln!(
            text,
            "{t},{x},{},{},{},{},{}",
            full(cell.n_minus),
            full(cell.n_zero),
            full(cell.n_plus),
            full(cell.rho()),
            full(cell.momentum()),
        );
    }
    let path = dir.join(format!("profile_t{t}.csv"));
    write_file(&path, &text)?;
    Ok(path)
}

/// Write the conserved totals for every recorded step as `conserved.csv`.
pub fn write_conserved(dir: &Path, history: &[PopulationField]) -> Result<PathBuf> {
    let mut text = String::from("t,total_mass,total_momentum\n");
    for (t, field) in history.iter().enumerate() {
        let _ = writeln!(text, "{t},{},{}", full(field.total_mass()), full(field.total_momentum()));
    }
    let path = dir.join("conserved.csv");
    write_file(&path, &text)?;
    Ok(path)
}

/// Write a momentum sweep as `equilibrium_sweep.csv`: measured late-time
/// population averages next to the matching closed-form prediction.
pub fn write_sweep(dir: &Path, points: &[SweepPoint]) -> Result<PathBuf> {
    let mut text = String::from(
        "u_x,f_minus,f_zero,f_plus,f_minus_theory,f_zero_theory,f_plus_theory\n",
    );
    for point in points {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            full(point.record.u_x),
            full(point.record.f_avg[0]),
            full(point.record.f_avg[1]),
            full(point.record.f_avg[2]),
            full(point.theory.n_minus),
            full(point.theory.n_zero),
            full(point.theory.n_plus),
        );
    }
    let path = dir.join("equilibrium_sweep.csv");
    write_file(&path, &text)?;
    Ok(path)
}

/// Write a relaxation-time scan as `tau_scan.csv`, one row per split rate.
pub fn write_tau_scan(dir: &Path, rows: &[TauScanRow]) -> Result<PathBuf> {
    let mut text = String::from("lambda_s,best_tau,distance_mass,distance_momentum,stable\n");
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            full(row.lambda_s),
            full(row.best_tau),
            full(row.distance_mass),
            full(row.distance_momentum),
            row.stable,
        );
    }
    let path = dir.join("tau_scan.csv");
    write_file(&path, &text)?;
    Ok(path)
}

/// Write a plain-text quantum circuit listing.
pub fn write_circuit(path: &Path, description: &str) -> Result<()> {
    write_file(path, description)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lga_core::lattice::Cell;

    fn sample_field() -> PopulationField {
        let cell = Cell { n_minus: 1.0, n_zero: 2.0, n_plus: 3.0 };
        PopulationField::uniform(4, cell).unwrap()
    }

    #[test]
    fn profile_has_header_and_one_row_per_site() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_profile(dir.path(), 7, &sample_field()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "t,x,n_minus,n_zero,n_plus,rho,rho_u");
        assert!(lines[1].starts_with("7,0,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn floats_round_trip_through_the_formatter() {
        let x = 0.1 + 0.2;
        let parsed: f64 = full(x).parse().unwrap();
        assert_eq!(parsed, x);
    }

    #[test]
    fn conserved_rows_track_history_length() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field();
        let history = vec![field.clone(), field];
        let path = write_conserved(dir.path(), &history).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
