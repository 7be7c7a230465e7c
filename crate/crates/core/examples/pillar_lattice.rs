//! Shorting pillars on a triangular lattice push the box modes of a
//! wafer-loaded 3-inch package above the qubit and readout bands.

use qpack_lab::cavity::{mode_report, parse_bands, solve_modes, LatticeKind, PillarLattice, SolverConfig};
use qpack_lab::field::{CavityGeometry, MaterialTable};

fn main() -> qpack_lab::Result<()> {
    let lattice = PillarLattice {
        kind: LatticeKind::Triangular,
        pitch: 9.5e-3,
        pillar_radius: 1e-3,
        extent: 46e-3,
        skip: vec![],
    };
    let geometry = CavityGeometry::new(47.3e-3, 2e-3, lattice.pillars()?, 0.5e-3, 10.0)?;
    let bare = CavityGeometry::new(47.3e-3, 2e-3, vec![], 0.5e-3, 10.0)?;
    let bands = parse_bands("4GHz:6GHz:qubit,9.5GHz:10.5GHz:readout")?;
    let materials = MaterialTable::bundled();

    let bare_spectrum = solve_modes(&bare, &materials, &SolverConfig::new(47.3e-3 / 150.0, 4))?;
    println!("bare fundamental {:.3} GHz", bare_spectrum.fundamental().unwrap_or(f64::NAN) / 1e9);

    let t = std::time::Instant::now();
    let spectrum = solve_modes(&geometry, &materials, &SolverConfig::new(lattice.pillar_radius / 4.0, 16))?;
    let report = mode_report(&spectrum, &bands)?;
    println!(
        "{} pillars, {} unknowns, {:.1} s",
        geometry.pillars().len(),
        spectrum.unknowns,
        t.elapsed().as_secs_f64()
    );
    for row in &report.rows {
        println!("{:>3} {:>8.4} GHz  {}", row.index, row.frequency_hz / 1e9, row.collision.as_deref().unwrap_or(""));
    }
    println!(
        "{} collisions; clearance {:.2} GHz",
        report.collisions,
        report.clearance_hz.unwrap_or(f64::NAN) / 1e9
    );
    Ok(())
}
