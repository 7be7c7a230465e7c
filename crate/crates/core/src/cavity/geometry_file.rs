//! Geometry file: `key = value unit` lines, `#` comments.
//!
//! ```text
//! radius = 47.3 mm
//! height = 2 mm
//! wafer_thickness = 0.43 mm
//! wafer_permittivity = 10
//! pillar = 12.0 -3.5 1.0 mm          # x y radius
//! lattice.kind = triangular
//! lattice.pitch = 9 mm
//! lattice.pillar_radius = 1 mm
//! lattice.extent = 44 mm
//! lattice.skip = 0,0 2,-1
//! ```

use std::path::Path;

use crate::cavity::lattice::{LatticeKind, PillarLattice};
use crate::error::{read_to_string, Error, Result};
use crate::field::{CavityGeometry, Pillar, Point2};
use crate::units::{parse_quantity, si_factor, Dimension};

pub fn load_geometry(path: &Path) -> Result<CavityGeometry> {
    parse_geometry(&read_to_string(path)?, &path.display().to_string())
}

pub fn parse_geometry(text: &str, context: &str) -> Result<CavityGeometry> {
    let mut radius = None;
    let mut height = None;
    let mut wafer_thickness = 0.0;
    let mut wafer_permittivity = 1.0;
    let mut pillars = Vec::new();
    let (mut kind, mut pitch, mut pillar_radius, mut extent, mut skip) = (None, None, None, None, Vec::new());

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(context, lineno + 1, m);
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let length = |v: &str| parse_quantity(v, Dimension::Length).map_err(|e| err(e.to_string()));
        match key {
            "radius" => radius = Some(length(value)?),
            "height" => height = Some(length(value)?),
            "wafer_thickness" => wafer_thickness = length(value)?,
            "wafer_permittivity" => {
                wafer_permittivity = parse_quantity(value, Dimension::Dimensionless).map_err(|e| err(e.to_string()))?
            }
            "pillar" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(err("pillar needs `x y radius unit`".into()));
                }
                let scale = si_factor(parts[3], Dimension::Length).map_err(|e| err(e.to_string()))?;
                let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
                pillars.push(Pillar {
                    center: Point2::new(num(parts[0])? * scale, num(parts[1])? * scale)
                        .map_err(|e| err(e.to_string()))?,
                    radius: num(parts[2])? * scale,
                });
            }
            "lattice.kind" => {
                kind = Some(match value {
                    "triangular" => LatticeKind::Triangular,
                    "square" => LatticeKind::Square,
                    other => return Err(err(format!("unknown lattice kind `{other}`"))),
                })
            }
            "lattice.pitch" => pitch = Some(length(value)?),
            "lattice.pillar_radius" => pillar_radius = Some(length(value)?),
            "lattice.extent" => extent = Some(length(value)?),
            "lattice.skip" => {
                for pair in value.split_whitespace() {
                    let (i, j) = pair
                        .split_once(',')
                        .ok_or_else(|| err(format!("skip entry `{pair}` is not i,j")))?;
                    let idx = |s: &str| s.trim().parse::<i32>().map_err(|_| err(format!("bad index `{s}`")));
                    skip.push((idx(i)?, idx(j)?));
                }
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::parse(context, 0, format!("missing `{k}`"));
    let radius = radius.ok_or_else(|| missing("radius"))?;
    if let Some(kind) = kind {
        let lattice = PillarLattice {
            kind,
            pitch: pitch.ok_or_else(|| missing("lattice.pitch"))?,
            pillar_radius: pillar_radius.ok_or_else(|| missing("lattice.pillar_radius"))?,
            extent: extent.unwrap_or(radius),
            skip,
        };
        pillars.extend(lattice.pillars()?);
    }
    CavityGeometry::new(
        radius,
        height.ok_or_else(|| missing("height"))?,
        pillars,
        wafer_thickness,
        wafer_permittivity,
    )
}

/// Renders a geometry in the file format above with explicit pillars.
pub fn write_geometry(g: &CavityGeometry) -> String {
    let mut out = format!(
        "radius = {:e} m\nheight = {:e} m\nwafer_thickness = {:e} m\nwafer_permittivity = {:e}\n",
        g.radius(),
        g.height(),
        g.wafer_thickness(),
        g.wafer_permittivity()
    );
    for p in g.pillars() {
        out.push_str(&format!("pillar = {:e} {:e} {:e} m\n", p.center.x, p.center.y, p.radius));
    }
    out
}
