//! Text interchange format for [`FieldGrid`].
//!
//! ```text
//! # comment
//! format = qpack-field-v1
//! dimensionality = 3
//! spacing = 1e-3 1e-3 2e-3 m
//! cells = 2
//! boundary_cells = 1
//! h_field = present
//! units = length:m e_field:V/m h_field:A/m
//! region = 0 cavity vacuum 1
//! [cells]
//! region,measure,x,y,z,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,hx_re,hx_im,hy_re,hy_im,hz_re,hz_im
//! ...
//! [boundary]
//! cell,nx,ny,nz,area,x,y,z,label
//! ...
//! ```
//!
//! Lengths, measures and areas are scaled by the declared length unit
//! (measure by its power `dimensionality`, area by its square). Floats are
//! written in shortest round-trip form so export → import is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{read_to_string, Error, Result};
use crate::field::grid::{BoundaryCell, FieldGrid, Region, Vec3c};
use crate::units::{si_factor, Dimension};

const FORMAT_TAG: &str = "qpack-field-v1";
const CELL_HEADER: &str =
    "region,measure,x,y,z,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,hx_re,hx_im,hy_re,hy_im,hz_re,hz_im";
const BOUNDARY_HEADER: &str = "cell,nx,ny,nz,area,x,y,z,label";

pub fn write_field_grid(grid: &FieldGrid) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# field grid exported by qpack-lab");
    let _ = writeln!(out, "format = {FORMAT_TAG}");
    let _ = writeln!(out, "dimensionality = {}", grid.dimensionality());
    let s = grid.spacing();
    let _ = writeln!(out, "spacing = {:e} {:e} {:e} m", s[0], s[1], s[2]);
    let _ = writeln!(out, "cells = {}", grid.len());
    let _ = writeln!(out, "boundary_cells = {}", grid.boundary().len());
    let has_h = grid.h_field().is_some();
    let _ = writeln!(out, "h_field = {}", if has_h { "present" } else { "absent" });
    let _ = writeln!(out, "units = length:m e_field:V/m h_field:A/m");
    for (i, r) in grid.regions().iter().enumerate() {
        match r.relative_permittivity {
            Some(eps) => {
                let _ = writeln!(out, "region = {i} {} {} {eps:e}", r.name, r.material);
            }
            None => {
                let _ = writeln!(out, "region = {i} {} {}", r.name, r.material);
            }
        }
    }
    out.push_str("[cells]\n");
    out.push_str(CELL_HEADER);
    out.push('\n');
    let zero = [Complex64::new(0.0, 0.0); 3];
    for i in 0..grid.len() {
        let p = grid.positions()[i];
        let e = grid.e_field()[i];
        let h = grid.h_field().map_or(zero, |h| h[i]);
        let _ = write!(
            out,
            "{},{:e},{:e},{:e},{:e}",
            grid.region_id()[i],
            grid.cell_measure()[i],
            p[0],
            p[1],
            p[2]
        );
        for c in e.iter().chain(h.iter()) {
            let _ = write!(out, ",{:e},{:e}", c.re, c.im);
        }
        out.push('\n');
    }
    out.push_str("[boundary]\n");
    out.push_str(BOUNDARY_HEADER);
    out.push('\n');
    for b in grid.boundary() {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            b.cell, b.normal[0], b.normal[1], b.normal[2], b.area, b.position[0], b.position[1], b.position[2], b.label
        );
    }
    out
}

pub fn save_field_grid(grid: &FieldGrid, path: &Path) -> Result<()> {
    crate::cli::atomic_write(path, write_field_grid(grid).as_bytes())
}

pub fn load_field_grid(path: &Path) -> Result<FieldGrid> {
    let text = read_to_string(path)?;
    parse_field_grid(&text, &path.display().to_string())
}

#[derive(PartialEq)]
enum Section {
    Header,
    Cells,
    Boundary,
}

pub fn parse_field_grid(text: &str, context: &str) -> Result<FieldGrid> {
    let perr = |line: usize, m: String| Error::parse(context, line, m);
    let num = |s: &str, line: usize| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::parse(context, line, format!("bad number `{s}`")))
    };

    let mut section = Section::Header;
    let mut expect_header_row = false;
    let mut dimensionality = None;
    let mut spacing = None;
    let mut n_cells = None;
    let mut n_boundary = None;
    let mut has_h = true;
    let mut length_scale = 1.0;
    let mut regions: Vec<(usize, Region)> = Vec::new();
    let mut format_seen = false;

    let mut positions = Vec::new();
    let mut e_field: Vec<Vec3c> = Vec::new();
    let mut h_field: Vec<Vec3c> = Vec::new();
    let mut measure = Vec::new();
    let mut region_id = Vec::new();
    let mut boundary = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[cells]" => {
                section = Section::Cells;
                expect_header_row = true;
                continue;
            }
            "[boundary]" => {
                section = Section::Boundary;
                expect_header_row = true;
                continue;
            }
            _ => {}
        }
        if expect_header_row {
            expect_header_row = false;
            let want = if section == Section::Cells { CELL_HEADER } else { BOUNDARY_HEADER };
            if line.replace(' ', "") != want {
                return Err(perr(lineno, format!("expected column header `{want}`")));
            }
            continue;
        }
        match section {
            Section::Header => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| perr(lineno, "expected `key = value`".into()))?;
                let value = value.trim();
                match key.trim() {
                    "format" => {
                        if value != FORMAT_TAG {
                            return Err(perr(lineno, format!("unsupported format `{value}`")));
                        }
                        format_seen = true;
                    }
                    "dimensionality" => {
                        dimensionality = Some(
                            value
                                .parse::<u8>()
                                .map_err(|_| perr(lineno, "dimensionality must be 2 or 3".into()))?,
                        )
                    }
                    "spacing" => {
                        let parts: Vec<&str> = value.split_whitespace().collect();
                        if parts.len() != 4 {
                            return Err(perr(lineno, "spacing needs three values and a unit".into()));
                        }
                        let unit = si_factor(parts[3], Dimension::Length)
                            .map_err(|e| perr(lineno, e.to_string()))?;
                        spacing = Some([
                            num(parts[0], lineno)? * unit,
                            num(parts[1], lineno)? * unit,
                            num(parts[2], lineno)? * unit,
                        ]);
                    }
                    "cells" => n_cells = Some(value.parse::<usize>().map_err(|_| perr(lineno, "bad cell count".into()))?),
                    "boundary_cells" => {
                        n_boundary = Some(value.parse::<usize>().map_err(|_| perr(lineno, "bad boundary count".into()))?)
                    }
                    "h_field" => {
                        has_h = match value {
                            "present" => true,
                            "absent" => false,
                            _ => return Err(perr(lineno, "h_field must be present|absent".into())),
                        }
                    }
                    "units" => {
                        for decl in value.split_whitespace() {
                            let (q, u) = decl
                                .split_once(':')
                                .ok_or_else(|| perr(lineno, format!("bad unit declaration `{decl}`")))?;
                            match (q, u) {
                                ("length", u) => {
                                    length_scale = si_factor(u, Dimension::Length).map_err(|e| perr(lineno, e.to_string()))?
                                }
                                ("e_field", "V/m") | ("h_field", "A/m") => {}
                                _ => return Err(perr(lineno, format!("unsupported unit `{decl}`"))),
                            }
                        }
                    }
                    "region" => {
                        let parts: Vec<&str> = value.split_whitespace().collect();
                        if parts.len() != 3 && parts.len() != 4 {
                            return Err(perr(lineno, "region = <id> <name> <material> [eps_r]".into()));
                        }
                        let id = parts[0].parse::<usize>().map_err(|_| perr(lineno, "bad region id".into()))?;
                        let eps = match parts.get(3) {
                            Some(s) => Some(num(s, lineno)?),
                            None => None,
                        };
                        regions.push((
                            id,
                            Region {
                                name: parts[1].to_string(),
                                material: parts[2].to_string(),
                                relative_permittivity: eps,
                            },
                        ));
                    }
                    other => return Err(perr(lineno, format!("unknown header key `{other}`"))),
                }
            }
            Section::Cells => {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 17 {
                    return Err(perr(lineno, format!("cell row needs 17 columns, found {}", cols.len())));
                }
                region_id.push(cols[0].trim().parse::<u32>().map_err(|_| perr(lineno, "bad region id".into()))?);
                measure.push(num(cols[1], lineno)?);
                positions.push([
                    num(cols[2], lineno)? * length_scale,
                    num(cols[3], lineno)? * length_scale,
                    num(cols[4], lineno)? * length_scale,
                ]);
                let mut v = [0.0; 12];
                for (k, slot) in v.iter_mut().enumerate() {
                    *slot = num(cols[5 + k], lineno)?;
                }
                let c = |k: usize| Complex64::new(v[2 * k], v[2 * k + 1]);
                e_field.push([c(0), c(1), c(2)]);
                h_field.push([c(3), c(4), c(5)]);
            }
            Section::Boundary => {
                let cols: Vec<&str> = line.splitn(9, ',').collect();
                if cols.len() != 9 {
                    return Err(perr(lineno, "boundary row needs 9 columns".into()));
                }
                boundary.push(BoundaryCell {
                    cell: cols[0].trim().parse::<usize>().map_err(|_| perr(lineno, "bad cell index".into()))?,
                    normal: [num(cols[1], lineno)?, num(cols[2], lineno)?, num(cols[3], lineno)?],
                    area: num(cols[4], lineno)? * length_scale * length_scale,
                    position: [
                        num(cols[5], lineno)? * length_scale,
                        num(cols[6], lineno)? * length_scale,
                        num(cols[7], lineno)? * length_scale,
                    ],
                    label: cols[8].trim().to_string(),
                });
            }
        }
    }

    if !format_seen {
        return Err(perr(0, "missing `format` header".into()));
    }
    let dimensionality = dimensionality.ok_or_else(|| perr(0, "missing dimensionality".into()))?;
    let spacing = spacing.ok_or_else(|| perr(0, "missing spacing".into()))?;
    if let Some(n) = n_cells {
        if n != measure.len() {
            return Err(perr(0, format!("header declares {n} cells, found {}", measure.len())));
        }
    }
    if let Some(n) = n_boundary {
        if n != boundary.len() {
            return Err(perr(0, format!("header declares {n} boundary cells, found {}", boundary.len())));
        }
    }
    regions.sort_by_key(|(id, _)| *id);
    if regions.iter().enumerate().any(|(k, (id, _))| k != *id) {
        return Err(perr(0, "region ids must be 0..n without gaps".into()));
    }
    let measure_scale = length_scale.powi(dimensionality as i32);
    let measure = measure.into_iter().map(|m| m * measure_scale).collect();

    FieldGrid::new(
        dimensionality,
        spacing,
        positions,
        e_field,
        has_h.then_some(h_field),
        measure,
        region_id,
        regions.into_iter().map(|(_, r)| r).collect(),
        boundary,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::test_support::uniform_strip;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = uniform_strip(5, 1.234_567_890_123_456_7, -0.1);
        let text = write_field_grid(&g);
        let back = parse_field_grid(&text, "mem").unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn length_unit_scales_geometry() {
        let g = uniform_strip(2, 1.0, 0.0);
        let text = write_field_grid(&g)
            .replace("units = length:m", "units = length:mm")
            .replace("1e-9,", "1e0,");
        let back = parse_field_grid(&text, "mem").unwrap();
        assert!((back.cell_measure()[0] - 1e-9).abs() < 1e-24);
        assert!((back.positions()[1][0] - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn rejects_truncated_rows() {
        let g = uniform_strip(2, 1.0, 0.0);
        let mut text = write_field_grid(&g);
        text = text.replace("cells = 2", "cells = 3");
        assert!(parse_field_grid(&text, "mem").is_err());
        assert!(parse_field_grid("dimensionality = 3\n", "mem").is_err());
    }
}
