//! Box modes of the thin cylindrical package cavity, with and without
//! shorting pillars.

mod discretize;
mod geometry_file;
mod lanczos;
mod lattice;
mod modes;
mod report;
pub mod sparse;

use std::path::Path;

pub use geometry_file::{load_geometry, parse_geometry, write_geometry};
pub use lattice::{LatticeKind, PillarLattice};
pub use modes::{solve_modes, ModeSpectrum, SolverConfig};
pub use report::{mode_report, parse_bands, Band, ModeReport, ModeRow};

use crate::error::{Error, Result};
use crate::field::{save_field_grid, ModeSolution};

/// Writes a normalized (1 J) mode in the field-grid interchange format.
pub fn export_mode_field(mode: &ModeSolution, path: &Path) -> Result<()> {
    if !mode.is_normalized_to(1.0, 1e-9) {
        return Err(Error::Domain(format!(
            "mode `{}` is not normalized to 1 J; normalize before export",
            mode.label
        )));
    }
    save_field_grid(&mode.field, path)
}
