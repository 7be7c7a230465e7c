//! Named material properties loaded from `material.property = value unit` files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{read_to_string, Error, Result};
use crate::units::{parse_quantity, Dimension};

const DEFAULT_TABLE: &str = include_str!("../../data/materials_default.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    RelativePermittivity,
    LossTangent,
    SurfaceResistance,
    PenetrationDepth,
    SkinDepth,
    OxideThickness,
    OxidePermittivity,
    SeamConductance,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::RelativePermittivity,
        Property::LossTangent,
        Property::SurfaceResistance,
        Property::PenetrationDepth,
        Property::SkinDepth,
        Property::OxideThickness,
        Property::OxidePermittivity,
        Property::SeamConductance,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Property::RelativePermittivity => "relative_permittivity",
            Property::LossTangent => "loss_tangent",
            Property::SurfaceResistance => "surface_resistance",
            Property::PenetrationDepth => "penetration_depth",
            Property::SkinDepth => "skin_depth",
            Property::OxideThickness => "oxide_thickness",
            Property::OxidePermittivity => "oxide_permittivity",
            Property::SeamConductance => "seam_conductance",
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            Property::RelativePermittivity | Property::LossTangent | Property::OxidePermittivity => {
                Dimension::Dimensionless
            }
            Property::SurfaceResistance => Dimension::Resistance,
            Property::PenetrationDepth | Property::SkinDepth | Property::OxideThickness => {
                Dimension::Length
            }
            Property::SeamConductance => Dimension::LineConductance,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "material property",
                name: s.to_string(),
            })
    }
}

/// Open set of optional properties per material. Values are SI.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MaterialTable {
    entries: BTreeMap<String, BTreeMap<Property, f64>>,
}

impl MaterialTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The bundled default table.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_TABLE, "materials_default").expect("bundled material table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut table = MaterialTable::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(context, lineno, "expected `material.property = value unit`"))?;
            let (material, property) = key
                .trim()
                .rsplit_once('.')
                .ok_or_else(|| Error::parse(context, lineno, "key must be `material.property`"))?;
            let property: Property = property
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(context, lineno, e.to_string()))?;
            let value = parse_quantity(value, property.dimension())
                .map_err(|e| Error::parse(context, lineno, e.to_string()))?;
            table
                .insert(material.trim(), property, value)
                .map_err(|e| Error::parse(context, lineno, e.to_string()))?;
        }
        Ok(table)
    }

    /// Inserts a property after checking its sign constraint.
    pub fn insert(&mut self, material: &str, property: Property, value: f64) -> Result<()> {
        let ok = match property {
            Property::LossTangent => value >= 0.0,
            _ => value > 0.0,
        };
        if !ok || !value.is_finite() {
            return Err(Error::invalid(
                "material property",
                format!("{material}.{property} = {value} violates its sign constraint"),
            ));
        }
        self.entries
            .entry(material.to_string())
            .or_default()
            .insert(property, value);
        Ok(())
    }

    pub fn get(&self, material: &str, property: Property) -> Result<f64> {
        self.try_get(material, property)
            .ok_or_else(|| Error::PropertyAbsent {
                material: material.to_string(),
                property: property.to_string(),
            })
    }

    pub fn try_get(&self, material: &str, property: Property) -> Option<f64> {
        self.entries.get(material).and_then(|m| m.get(&property)).copied()
    }

    pub fn contains_material(&self, material: &str) -> bool {
        self.entries.contains_key(material)
    }

    pub fn materials(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_values() {
        let t = MaterialTable::bundled();
        assert!((t.get("Al", Property::PenetrationDepth).unwrap() - 50e-9).abs() < 1e-20);
        assert_eq!(t.get("Rogers", Property::RelativePermittivity).unwrap(), 2.2);
        assert_eq!(t.get("Rogers", Property::LossTangent).unwrap(), 7e-4);
        assert_eq!(t.get("Al/Al", Property::SeamConductance).unwrap(), 700.0);
        assert!((t.get("Al", Property::SurfaceResistance).unwrap() - 3e-6).abs() < 1e-18);
        assert!((t.get("Cu", Property::SkinDepth).unwrap() - 840e-9).abs() < 1e-18);
    }

    #[test]
    fn absent_property_is_an_error() {
        let t = MaterialTable::parse("Cu.surface_resistance = 1 mohm\n", "t").unwrap();
        match t.get("Cu", Property::SkinDepth) {
            Err(Error::PropertyAbsent { material, property }) => {
                assert_eq!(material, "Cu");
                assert_eq!(property, "skin_depth");
            }
            other => panic!("expected absent property, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MaterialTable::parse("Al.penetration_depth = -5 nm", "t").is_err());
        assert!(MaterialTable::parse("Al.penetration_depth 5 nm", "t").is_err());
        assert!(MaterialTable::parse("Al.colour = 5", "t").is_err());
        assert!(MaterialTable::parse("Al.penetration_depth = 5 ohm", "t").is_err());
        assert!(MaterialTable::parse("vacuum.loss_tangent = 0", "t").is_ok());
    }
}
