//! Loss budget of the bare-package TM₀₁₀ mode: participations evaluated on
//! the solved field, per-channel Q limits and the seam conductance needed
//! to sustain a given T₁.

use qpack_lab::cavity::{solve_modes, SolverConfig};
use qpack_lab::field::{CavityGeometry, MaterialTable};
use qpack_lab::loss::{
    assemble_budget, evaluate_channels, parse_channels, seam_bound_from_t1, t1_from_q, LossKind,
};

const CHANNELS: &str = "
surface_dielectric lid        Al  convention=metal_air
surface_dielectric floor      Al  convention=metal_air
conductor          lid        Al
conductor          floor      Al
conductor          outer_wall Al
seam               outer_wall Al/Al
";

fn main() -> qpack_lab::Result<()> {
    let geometry = CavityGeometry::bare_disc(47.3e-3, 2e-3)?;
    let materials = MaterialTable::bundled();
    let spectrum = solve_modes(&geometry, &materials, &SolverConfig::new(47.3e-3 / 100.0, 1))?;
    let mode = &spectrum.modes[0];
    let f = mode.frequency;

    let decls = parse_channels(CHANNELS, "example")?;
    let channels = evaluate_channels(&mode.field, &decls, &materials, f)?;
    let budget = assemble_budget(&channels, &materials, f)?;
    println!("{} at {:.4} GHz", mode.label, f / 1e9);
    for e in &budget.channels {
        println!("  {:<20} {:<11} value {:.4e}  Q {:.3e}", e.channel.kind.key(), e.channel.label, e.channel.value, e.q_limit);
    }
    println!("  total Q {:.3e}, T1 limit {:.3e} s", budget.total_q, budget.t1_limit);

    // A qubit-scale target: Q of 3.5e7 at 4.5 GHz.
    let t1 = t1_from_q(3.5e7, 4.5e9)?;
    println!("Q 3.5e7 at 4.5 GHz -> T1 {:.3} ms", t1 * 1e3);
    if let Some(seam) = channels.iter().find(|c| c.kind == LossKind::Seam) {
        let g = seam_bound_from_t1(t1, f, seam.value)?;
        println!("seam admittance {:.4e} /(ohm m) needs g >= {:.3e} S/m for that T1", seam.value, g);
    }
    Ok(())
}
