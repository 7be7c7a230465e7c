//! Participation ratios and seam admittances as cell-wise sums over a
//! field grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{norm_sqr, projected_sqr, BoundaryCell, FieldGrid, MaterialTable};
use crate::units::{EPS0, MU0};

/// p_E = ∫_region ε|E|² / ∫ ε|E|².
pub fn dielectric_participation(field: &FieldGrid, region: &str, materials: &MaterialTable) -> Result<f64> {
    let id = field.region_index(region)?;
    let eps = field.region_permittivities(Some(materials))?;
    let w = field.electric_weights(&eps);
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("field carries no electric energy".into()));
    }
    let part: f64 = w
        .iter()
        .zip(field.region_id())
        .filter(|(_, &r)| r == id)
        .map(|(w, _)| w)
        .sum();
    Ok(part / total)
}

/// How the thin layer's energy is inferred from the sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceConvention {
    /// Oxide on a metal, field sampled in the vacuum just outside it:
    /// t·∫ε|E|² divided by ε_ox².
    #[default]
    MetalAir,
    /// Layer on a dielectric, field sampled on the vacuum side: tangential E
    /// continuous, normal D continuous.
    SubstrateAir,
    /// Layer between metal and substrate, field sampled in the substrate:
    /// only normal D survives.
    MetalSubstrate,
}

impl std::str::FromStr for SurfaceConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metal_air" => Ok(Self::MetalAir),
            "substrate_air" => Ok(Self::SubstrateAir),
            "metal_substrate" => Ok(Self::MetalSubstrate),
            other => Err(Error::Unknown {
                kind: "surface convention",
                name: other.to_string(),
            }),
        }
    }
}

fn surface_entries<'a>(field: &'a FieldGrid, surface: &'a str) -> Result<Vec<&'a BoundaryCell>> {
    let entries: Vec<_> = field.boundary_with_label(surface).map(|(_, b)| b).collect();
    if entries.is_empty() {
        return Err(Error::Unknown {
            kind: "surface",
            name: surface.to_string(),
        });
    }
    Ok(entries)
}

/// Metal-surface oxide participation (vacuum-side sampling, 1/ε_ox²).
pub fn surface_dielectric_participation(
    field: &FieldGrid,
    surface: &str,
    thickness: f64,
    oxide_permittivity: f64,
) -> Result<f64> {
    surface_participation_with(field, surface, thickness, oxide_permittivity, SurfaceConvention::MetalAir, None)
}

pub fn surface_participation_with(
    field: &FieldGrid,
    surface: &str,
    thickness: f64,
    layer_permittivity: f64,
    convention: SurfaceConvention,
    materials: Option<&MaterialTable>,
) -> Result<f64> {
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(Error::invalid("layer thickness", format!("{thickness} m")));
    }
    if !(layer_permittivity > 0.0 && layer_permittivity.is_finite()) {
        return Err(Error::invalid("layer permittivity", format!("{layer_permittivity}")));
    }
    let entries = surface_entries(field, surface)?;
    let eps = field.region_permittivities(materials)?;
    let total: f64 = field.electric_weights(&eps).iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("field carries no electric energy".into()));
    }
    let e = field.e_field();
    let rid = field.region_id();
    let el = layer_permittivity;
    let surf: f64 = entries
        .iter()
        .map(|b| {
            let ec = eps[rid[b.cell] as usize];
            let v = &e[b.cell];
            let all = norm_sqr(v);
            let normal = projected_sqr(v, &b.normal);
            let density = match convention {
                SurfaceConvention::MetalAir => ec * all / (el * el),
                SurfaceConvention::SubstrateAir => el * (all - normal) + ec * ec * normal / el,
                SurfaceConvention::MetalSubstrate => ec * ec * normal / el,
            };
            EPS0 * density * b.area
        })
        .sum();
    Ok(thickness * surf / total)
}

/// p_cond = λ·∫|H_∥|² dS / ∫|H|² dV.
pub fn conductor_participation(field: &FieldGrid, surface: &str, penetration_depth: f64) -> Result<f64> {
    if !(penetration_depth >= 0.0 && penetration_depth.is_finite()) {
        return Err(Error::invalid("penetration depth", format!("{penetration_depth} m")));
    }
    let h = field.require_h()?;
    let entries = surface_entries(field, surface)?;
    let volume = field.magnetic_integral()? / MU0;
    if !(volume > 0.0) {
        return Err(Error::Domain("field carries no magnetic energy".into()));
    }
    let surf: f64 = entries
        .iter()
        .map(|b| {
            let v = &h[b.cell];
            (norm_sqr(v) - projected_sqr(v, &b.normal)).max(0.0) * b.area
        })
        .sum();
    Ok(penetration_depth * surf / volume)
}

/// Ordered polyline of boundary entries along a mechanical joint.
#[derive(Debug, Clone, PartialEq)]
pub struct SeamPath {
    /// Indices into the grid's boundary list, in path order.
    pub entries: Vec<usize>,
    pub closed: bool,
}

impl SeamPath {
    pub fn new(entries: Vec<usize>, closed: bool) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("seam path", "empty path"));
        }
        Ok(Self { entries, closed })
    }

    /// Takes every boundary entry carrying `label`, in stored order. The path
    /// is closed when its end lies within 1.5 segment lengths of its start.
    pub fn from_label(field: &FieldGrid, label: &str) -> Result<Self> {
        let entries: Vec<usize> = field.boundary_with_label(label).map(|(i, _)| i).collect();
        if entries.is_empty() {
            return Err(Error::Unknown {
                kind: "seam",
                name: label.to_string(),
            });
        }
        let pos = |k: usize| field.boundary()[entries[k]].position;
        let dist = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        let longest = (1..entries.len()).map(|k| dist(pos(k - 1), pos(k))).fold(0.0, f64::max);
        let closed = entries.len() > 2 && dist(pos(entries.len() - 1), pos(0)) <= 1.5 * longest;
        Ok(Self { entries, closed })
    }

    /// Length of the polyline, m.
    pub fn length(&self, field: &FieldGrid) -> f64 {
        self.segments(field).map(|(_, _, l)| l).sum()
    }

    fn segments<'a>(&'a self, field: &'a FieldGrid) -> impl Iterator<Item = (usize, usize, f64)> + 'a {
        let n = self.entries.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        let b = field.boundary();
        (0..count).map(move |k| {
            let (i, j) = (k, (k + 1) % n);
            let (p, q) = (b[self.entries[i]].position, b[self.entries[j]].position);
            let l = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
            (i, j, l)
        })
    }
}

/// y_seam = ∫_seam |H_∥|² dl / (ω ∫ μ₀|H|² dV), H_∥ along the seam tangent.
pub fn seam_admittance(field: &FieldGrid, path: &SeamPath, frequency: f64) -> Result<f64> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::invalid("frequency", format!("{frequency} Hz")));
    }
    if path.entries.is_empty() {
        return Err(Error::invalid("seam path", "empty path"));
    }
    let h = field.require_h()?;
    let b = field.boundary();
    if let Some(&bad) = path.entries.iter().find(|&&e| e >= b.len()) {
        return Err(Error::invalid("seam path", format!("entry {bad} out of range")));
    }
    let magnetic = field.magnetic_integral()?;
    if !(magnetic > 0.0) {
        return Err(Error::Domain("zero total magnetic energy".into()));
    }
    let n = path.entries.len();
    let pos = |k: usize| b[path.entries[k]].position;
    // tangent by central difference, one-sided at the ends of an open path
    let tangent = |k: usize| -> [f64; 3] {
        let (prev, next) = if path.closed {
            ((k + n - 1) % n, (k + 1) % n)
        } else {
            (k.saturating_sub(1), (k + 1).min(n - 1))
        };
        let (p, q) = (pos(prev), pos(next));
        let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        let l = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if l > 0.0 {
            [d[0] / l, d[1] / l, d[2] / l]
        } else {
            [0.0; 3]
        }
    };
    let along: Vec<f64> = (0..n).map(|k| projected_sqr(&h[b[path.entries[k]].cell], &tangent(k))).collect();
    let line: f64 = path.segments(field).map(|(i, j, l)| 0.5 * (along[i] + along[j]) * l).sum();
    Ok(line / (2.0 * std::f64::consts::PI * frequency * magnetic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::test_support::uniform_strip;
    use crate::field::{Region, Vec3c};
    use num_complex::Complex64;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    /// Parallel-plate stack along z: `n` cells, the lowest `k` in a dielectric.
    fn slab(n: usize, k: usize, eps: f64) -> FieldGrid {
        let z = c(0.0);
        let d = 1.0;
        let e: Vec<Vec3c> = (0..n).map(|i| [z, z, c(if i < k { d / eps } else { d })]).collect();
        FieldGrid::new(
            3,
            [1.0, 1.0, 0.1],
            (0..n).map(|i| [0.0, 0.0, (i as f64 + 0.5) * 0.1]).collect(),
            e,
            None,
            vec![0.1; n],
            (0..n).map(|i| u32::from(i >= k)).collect(),
            vec![
                Region {
                    name: "slab".into(),
                    material: "diel".into(),
                    relative_permittivity: Some(eps),
                },
                Region {
                    name: "gap".into(),
                    material: "vacuum".into(),
                    relative_permittivity: Some(1.0),
                },
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn series_capacitor_slab() {
        let g = slab(10, 3, 10.0);
        let table = MaterialTable::new();
        let p = dielectric_participation(&g, "slab", &table).unwrap();
        // energy per unit D² is thickness/ε per layer
        let expected = (0.3 / 10.0) / (0.3 / 10.0 + 0.7);
        assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
        let q = dielectric_participation(&g, "gap", &table).unwrap();
        assert!((p + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn whole_grid_and_halves() {
        let g = uniform_strip(4, 2.0, 0.0);
        let table = MaterialTable::new();
        assert!((dielectric_participation(&g, "gap", &table).unwrap() - 1.0).abs() < 1e-15);
        assert!(dielectric_participation(&g, "nowhere", &table).is_err());
    }

    fn strip_with_surface(normal: [f64; 3]) -> FieldGrid {
        let g = uniform_strip(4, 3.0, 2.0);
        let boundary = (0..4)
            .map(|i| BoundaryCell {
                cell: i,
                normal,
                area: 1e-6,
                label: "floor".into(),
                position: [i as f64 * 1e-3, 0.0, 0.0],
            })
            .collect();
        FieldGrid::new(
            3,
            g.spacing(),
            g.positions().to_vec(),
            g.e_field().to_vec(),
            g.h_field().map(|h| h.to_vec()),
            g.cell_measure().to_vec(),
            g.region_id().to_vec(),
            g.regions().to_vec(),
            boundary,
        )
        .unwrap()
    }

    #[test]
    fn surface_oxide_scalings() {
        let g = strip_with_surface([0.0, 0.0, -1.0]);
        let p1 = surface_dielectric_participation(&g, "floor", 3e-9, 10.0).unwrap();
        let p2 = surface_dielectric_participation(&g, "floor", 3e-9, 20.0).unwrap();
        let half = surface_dielectric_participation(&g, "floor", 1.5e-9, 10.0).unwrap();
        assert!((p1 / p2 - 4.0).abs() < 1e-12);
        assert!((p1 / half - 2.0).abs() < 1e-12);
        // 4 cells of 1e-9 m³ and surface 4e-6 m²: layer fraction t·A/V / ε²
        assert!((p1 - 3e-9 * 4e-6 / 4e-9 / 100.0).abs() < 1e-15);
        assert!(surface_dielectric_participation(&g, "floor", 0.0, 10.0).is_err());
        assert!(surface_dielectric_participation(&g, "lid", 3e-9, 10.0).is_err());
    }

    #[test]
    fn conductor_normal_field_gives_zero() {
        // H is along y in the strip
        let g = strip_with_surface([0.0, 1.0, 0.0]);
        assert_eq!(conductor_participation(&g, "floor", 50e-9).unwrap(), 0.0);
        let g = strip_with_surface([0.0, 0.0, -1.0]);
        let p = conductor_participation(&g, "floor", 50e-9).unwrap();
        let p2 = conductor_participation(&g, "floor", 100e-9).unwrap();
        assert!((p2 / p - 2.0).abs() < 1e-12);
        assert!((p - 50e-9 * 4e-6 / 4e-9).abs() < 1e-12);
    }

    #[test]
    fn seam_scales_inversely_with_frequency() {
        let g = strip_with_surface([0.0, 0.0, -1.0]);
        let path = SeamPath::from_label(&g, "floor").unwrap();
        assert!(!path.closed);
        assert!((path.length(&g) - 3e-3).abs() < 1e-15);
        // H along y, seam along x: no parallel component
        assert_eq!(seam_admittance(&g, &path, 5e9).unwrap(), 0.0);
        assert!(SeamPath::new(vec![], false).is_err());
    }
}
