//! Channel declaration file for the `loss` subcommand.
//!
//! One channel per line: `kind label material [key=value ...]`.
//!
//! ```text
//! bulk_dielectric    wafer       sapphire
//! surface_dielectric lid         Al   convention=metal_air
//! surface_dielectric wafer_top   AlOx thickness=3nm convention=substrate_air
//! conductor          lid         Al
//! seam               outer_wall  Al/Al
//! ```
//!
//! Surface channels take thickness and layer permittivity from options or
//! from the material's `oxide_thickness` / `oxide_permittivity` (falling
//! back to its `relative_permittivity`). Seams name a boundary label; the
//! entries carrying it form the seam path in stored order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::field::{FieldGrid, MaterialTable, Property};
use crate::loss::budget::{LossChannel, LossKind};
use crate::loss::participation::{
    conductor_participation, dielectric_participation, seam_admittance, surface_participation_with, SeamPath,
    SurfaceConvention,
};
use crate::units::{parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDecl {
    pub kind: LossKind,
    pub label: String,
    pub material: String,
    pub thickness: Option<f64>,
    pub layer_permittivity: Option<f64>,
    pub convention: SurfaceConvention,
}

pub fn load_channels(path: &Path) -> Result<Vec<ChannelDecl>> {
    parse_channels(&read_to_string(path)?, &path.display().to_string())
}

pub fn parse_channels(text: &str, context: &str) -> Result<Vec<ChannelDecl>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(context, lineno + 1, m);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(err("expected `kind label material [key=value ...]`".into()));
        }
        let kind: LossKind = tokens[0].parse().map_err(|e: Error| err(e.to_string()))?;
        let mut decl = ChannelDecl {
            kind,
            label: tokens[1].to_string(),
            material: tokens[2].to_string(),
            thickness: None,
            layer_permittivity: None,
            convention: SurfaceConvention::default(),
        };
        for opt in &tokens[3..] {
            let (k, v) = opt
                .split_once('=')
                .ok_or_else(|| err(format!("option `{opt}` is not key=value")))?;
            match k {
                "thickness" => {
                    let split = v.find(|c: char| c.is_ascii_alphabetic() && c != 'e').unwrap_or(v.len());
                    let (num, unit) = v.split_at(split);
                    let unit = if unit.is_empty() { "m" } else { unit };
                    decl.thickness =
                        Some(parse_quantity(&format!("{num} {unit}"), Dimension::Length).map_err(|e| err(e.to_string()))?);
                }
                "permittivity" => {
                    decl.layer_permittivity = Some(v.parse().map_err(|_| err(format!("bad permittivity `{v}`")))?)
                }
                "convention" => decl.convention = v.parse().map_err(|e: Error| err(e.to_string()))?,
                other => return Err(err(format!("unknown option `{other}`"))),
            }
        }
        if kind != LossKind::SurfaceDielectric
            && (decl.thickness.is_some() || decl.layer_permittivity.is_some() || opt_has_convention(&tokens[3..]))
        {
            return Err(err(format!("options only apply to surface_dielectric channels, not {kind}")));
        }
        out.push(decl);
    }
    Ok(out)
}

fn opt_has_convention(opts: &[&str]) -> bool {
    opts.iter().any(|o| o.starts_with("convention="))
}

/// Evaluates each declaration on the field, producing participations and
/// admittances ready for [`crate::loss::assemble_budget`].
pub fn evaluate_channels(
    field: &FieldGrid,
    decls: &[ChannelDecl],
    materials: &MaterialTable,
    frequency: f64,
) -> Result<Vec<LossChannel>> {
    decls
        .iter()
        .map(|d| {
            let m = d.material.as_str();
            let value = match d.kind {
                LossKind::BulkDielectric => dielectric_participation(field, &d.label, materials)?,
                LossKind::SurfaceDielectric => {
                    let t = match d.thickness {
                        Some(t) => t,
                        None => materials.get(m, Property::OxideThickness)?,
                    };
                    let eps = match d.layer_permittivity {
                        Some(e) => e,
                        None => materials
                            .try_get(m, Property::OxidePermittivity)
                            .map_or_else(|| materials.get(m, Property::RelativePermittivity), Ok)?,
                    };
                    surface_participation_with(field, &d.label, t, eps, d.convention, Some(materials))?
                }
                LossKind::Conductor => {
                    conductor_participation(field, &d.label, materials.get(m, Property::PenetrationDepth)?)?
                }
                LossKind::Seam => seam_admittance(field, &SeamPath::from_label(field, &d.label)?, frequency)?,
            };
            LossChannel::new(d.kind, d.label.clone(), value, m)
        })
        .collect()
}
