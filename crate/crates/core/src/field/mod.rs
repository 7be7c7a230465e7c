//! Shared domain types: cavity geometry, field grids, materials and modes.

mod geometry;
mod grid;
mod grid_io;
mod materials;
mod mode;

pub use geometry::{CavityGeometry, Pillar, Point2};
pub use grid::{BoundaryCell, FieldGrid, Region, Vec3c};
pub use grid_io::{load_field_grid, parse_field_grid, save_field_grid, write_field_grid};
pub use materials::{MaterialTable, Property};
pub use mode::{normalize_energy, ModeSolution, ModeSummary};

pub(crate) use grid::{norm_sqr, projected_sqr};

#[cfg(test)]
pub(crate) use grid::test_support;
