use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::materials::{MaterialTable, Property};
use crate::units::{EPS0, MU0};

pub type Vec3c = [Complex64; 3];

/// A material region referenced by the per-cell `region_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub material: String,
    /// Relative permittivity used for energy sums. When absent, lookups fall
    /// back to the material table.
    pub relative_permittivity: Option<f64>,
}

/// A cell adjacent to a conducting or dielectric surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCell {
    pub cell: usize,
    /// Outward unit normal (from the field region into the surface).
    pub normal: [f64; 3],
    /// Surface area attributed to this entry, m².
    pub area: f64,
    pub label: String,
    /// Point on the surface that this entry samples, m.
    pub position: [f64; 3],
}

/// Field samples on a structured grid. Cells carry piecewise-constant
/// fields; every integral in the loss budget is a cell-wise sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    dimensionality: u8,
    spacing: [f64; 3],
    positions: Vec<[f64; 3]>,
    e_field: Vec<Vec3c>,
    h_field: Option<Vec<Vec3c>>,
    cell_measure: Vec<f64>,
    region_id: Vec<u32>,
    regions: Vec<Region>,
    boundary: Vec<BoundaryCell>,
}

pub(crate) fn norm_sqr(v: &Vec3c) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// |v · u|² for complex `v` and real `u`.
pub(crate) fn projected_sqr(v: &Vec3c, u: &[f64; 3]) -> f64 {
    (v[0] * u[0] + v[1] * u[1] + v[2] * u[2]).norm_sqr()
}

#[allow(clippy::too_many_arguments)]
impl FieldGrid {
    pub fn new(
        dimensionality: u8,
        spacing: [f64; 3],
        positions: Vec<[f64; 3]>,
        e_field: Vec<Vec3c>,
        h_field: Option<Vec<Vec3c>>,
        cell_measure: Vec<f64>,
        region_id: Vec<u32>,
        regions: Vec<Region>,
        boundary: Vec<BoundaryCell>,
    ) -> Result<Self> {
        let grid = Self {
            dimensionality,
            spacing,
            positions,
            e_field,
            h_field,
            cell_measure,
            region_id,
            regions,
            boundary,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid("field grid", m));
        if self.dimensionality != 2 && self.dimensionality != 3 {
            return bad(format!("dimensionality must be 2 or 3, got {}", self.dimensionality));
        }
        if self.spacing.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("spacing must be positive".into());
        }
        let n = self.cell_measure.len();
        if self.e_field.len() != n
            || self.region_id.len() != n
            || self.positions.len() != n
            || self.h_field.as_ref().is_some_and(|h| h.len() != n)
        {
            return bad("per-cell arrays have differing lengths".into());
        }
        if let Some(i) = self.cell_measure.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return bad(format!("cell {i} has non-positive measure"));
        }
        if let Some(&r) = self.region_id.iter().find(|&&r| r as usize >= self.regions.len()) {
            return bad(format!("region id {r} has no region declaration"));
        }
        let fields_finite = |f: &[Vec3c]| f.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite());
        if !fields_finite(&self.e_field) || !self.h_field.as_deref().is_none_or(fields_finite) {
            return bad("field samples must be finite".into());
        }
        for (k, b) in self.boundary.iter().enumerate() {
            if b.cell >= n {
                return bad(format!("boundary entry {k} references cell {} of {n}", b.cell));
            }
            let norm = b.normal.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return bad(format!("boundary entry {k} normal has magnitude {norm}"));
            }
            if !(b.area > 0.0 && b.area.is_finite()) {
                return bad(format!("boundary entry {k} has non-positive area"));
            }
        }
        Ok(())
    }

    pub fn dimensionality(&self) -> u8 {
        self.dimensionality
    }
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }
    pub fn len(&self) -> usize {
        self.cell_measure.len()
    }
    pub fn is_empty(&self) -> bool {
        self.cell_measure.is_empty()
    }
    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }
    pub fn e_field(&self) -> &[Vec3c] {
        &self.e_field
    }
    pub fn h_field(&self) -> Option<&[Vec3c]> {
        self.h_field.as_deref()
    }
    pub fn cell_measure(&self) -> &[f64] {
        &self.cell_measure
    }
    pub fn region_id(&self) -> &[u32] {
        &self.region_id
    }
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }
    pub fn boundary(&self) -> &[BoundaryCell] {
        &self.boundary
    }

    pub fn region_index(&self, name: &str) -> Result<u32> {
        self.regions
            .iter()
            .position(|r| r.name == name)
            .map(|i| i as u32)
            .ok_or_else(|| Error::Unknown {
                kind: "region",
                name: name.to_string(),
            })
    }

    pub fn boundary_with_label<'a>(&'a self, label: &'a str) -> impl Iterator<Item = (usize, &'a BoundaryCell)> + 'a {
        self.boundary
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.label == label)
    }

    /// Relative permittivity per region: the grid's own value, else the
    /// material table's, else an error.
    pub fn region_permittivities(&self, materials: Option<&MaterialTable>) -> Result<Vec<f64>> {
        self.regions
            .iter()
            .map(|r| match (materials, r.relative_permittivity) {
                (Some(m), own) => m
                    .try_get(&r.material, Property::RelativePermittivity)
                    .or(own)
                    .ok_or_else(|| Error::PropertyAbsent {
                        material: r.material.clone(),
                        property: Property::RelativePermittivity.to_string(),
                    }),
                (None, Some(eps)) => Ok(eps),
                (None, None) => Err(Error::PropertyAbsent {
                    material: r.material.clone(),
                    property: Property::RelativePermittivity.to_string(),
                }),
            })
            .collect()
    }

    /// Electric energy density integrand ε|E|²·dV per cell (J·2).
    pub(crate) fn electric_weights(&self, eps_r: &[f64]) -> Vec<f64> {
        self.e_field
            .iter()
            .zip(&self.cell_measure)
            .zip(&self.region_id)
            .map(|((e, dv), &r)| EPS0 * eps_r[r as usize] * norm_sqr(e) * dv)
            .collect()
    }

    /// ∫ (ε|E|² + μ₀|H|²)/2 dV using the grid's region permittivities.
    pub fn total_energy(&self) -> Result<f64> {
        let eps_r = self.region_permittivities(None)?;
        let electric: f64 = self.electric_weights(&eps_r).iter().sum();
        let magnetic: f64 = match &self.h_field {
            Some(h) => h
                .iter()
                .zip(&self.cell_measure)
                .map(|(h, dv)| MU0 * norm_sqr(h) * dv)
                .sum(),
            None => 0.0,
        };
        Ok(0.5 * (electric + magnetic))
    }

    /// ∫ μ₀|H|² dV.
    pub fn magnetic_integral(&self) -> Result<f64> {
        let h = self.require_h()?;
        Ok(h.iter()
            .zip(&self.cell_measure)
            .map(|(h, dv)| MU0 * norm_sqr(h) * dv)
            .sum())
    }

    pub(crate) fn require_h(&self) -> Result<&[Vec3c]> {
        self.h_field
            .as_deref()
            .ok_or_else(|| Error::Domain("field grid carries no magnetic field samples".into()))
    }

    /// Multiplies every field sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |f: &Vec<Vec3c>| -> Vec<Vec3c> {
            f.iter().map(|v| [v[0] * factor, v[1] * factor, v[2] * factor]).collect()
        };
        Self {
            e_field: scale(&self.e_field),
            h_field: self.h_field.as_ref().map(scale),
            ..self.clone()
        }
    }

    /// Same grid with region declarations permuted; `order[k]` gives the old
    /// index placed at new position `k`.
    pub fn relabeled(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.regions.len() {
            return Err(Error::invalid("region permutation", "length mismatch"));
        }
        let mut new_of_old = vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            if old >= order.len() || new_of_old[old] != usize::MAX {
                return Err(Error::invalid("region permutation", "not a permutation"));
            }
            new_of_old[old] = new;
        }
        Ok(Self {
            regions: order.iter().map(|&o| self.regions[o].clone()).collect(),
            region_id: self.region_id.iter().map(|&r| new_of_old[r as usize] as u32).collect(),
            ..self.clone()
        })
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Single-cell-thick slab of `n` cells along x with uniform E_z.
    pub fn uniform_strip(n: usize, e: f64, h: f64) -> FieldGrid {
        let c = |v: f64| Complex64::new(v, 0.0);
        let z = Complex64::new(0.0, 0.0);
        FieldGrid::new(
            3,
            [1e-3, 1e-3, 1e-3],
            (0..n).map(|i| [i as f64 * 1e-3, 0.0, 0.0]).collect(),
            vec![[z, z, c(e)]; n],
            Some(vec![[z, c(h), z]; n]),
            vec![1e-9; n],
            vec![0; n],
            vec![Region {
                name: "gap".into(),
                material: "vacuum".into(),
                relative_permittivity: Some(1.0),
            }],
            vec![],
        )
        .unwrap()
    }
}
