use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};

const TABLE: &str = include_str!("../../data/contraction.toml");

#[derive(Deserialize)]
struct ContractionFile {
    integrated_contraction: BTreeMap<String, f64>,
}

/// Integrated thermal contraction ΔL/L between room temperature and 4 K
/// for the bundled materials.
pub fn bundled_contraction(material: &str) -> Result<f64> {
    let file: ContractionFile = toml::from_str(TABLE).expect("bundled contraction table is valid");
    file.integrated_contraction.get(material).copied().ok_or_else(|| Error::Unknown {
        kind: "contraction material",
        name: material.into(),
    })
}

/// Relative radial travel between two bonded materials at `radius`.
pub fn differential_contraction(radius: f64, contraction_a: f64, contraction_b: f64) -> Result<f64> {
    for c in [contraction_a, contraction_b] {
        if !(0.0..=0.05).contains(&c) {
            return Err(Error::invalid("contraction", format!("ΔL/L = {c} outside [0, 0.05]")));
        }
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("{radius} m")));
    }
    Ok((contraction_a - contraction_b).abs() * radius)
}
