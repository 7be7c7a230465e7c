//! Box modes of a bare 3-inch-wafer cavity and the TM₀₁₀ check.

use qpack_lab::cavity::{mode_report, parse_bands, solve_modes, SolverConfig};
use qpack_lab::field::{CavityGeometry, MaterialTable};

fn main() -> qpack_lab::Result<()> {
    let radius = 47.3e-3;
    let geometry = CavityGeometry::bare_disc(radius, 2e-3)?;
    let config = SolverConfig::new(radius / 150.0, 16);
    let t = std::time::Instant::now();
    let spectrum = solve_modes(&geometry, &MaterialTable::bundled(), &config)?;
    println!(
        "{} unknowns, Krylov basis {}, {:.2} s",
        spectrum.unknowns,
        spectrum.krylov_dimension,
        t.elapsed().as_secs_f64()
    );
    let analytic = 2.404_825_557_695_773 * qpack_lab::units::C0 / (2.0 * std::f64::consts::PI * radius);
    println!("TM010 analytic {:.4} GHz", analytic / 1e9);
    let report = mode_report(&spectrum, &parse_bands("4GHz:6GHz:qubit,9.5GHz:10.5GHz:readout")?)?;
    for row in &report.rows {
        println!(
            "{:>3} {:>8.4} GHz  group {:>2}  {}",
            row.index,
            row.frequency_hz / 1e9,
            row.group,
            row.collision.as_deref().unwrap_or("")
        );
    }
    println!("{} collisions", report.collisions);
    Ok(())
}
