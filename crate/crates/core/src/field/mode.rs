use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::grid::FieldGrid;

/// A single eigenmode: frequency plus its field samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub frequency: f64,
    pub field: FieldGrid,
    pub stored_energy: f64,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSummary {
    pub label: String,
    pub frequency_hz: f64,
    pub stored_energy_j: f64,
}

impl ModeSolution {
    pub fn new(frequency: f64, field: FieldGrid, label: impl Into<String>) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::invalid("mode", format!("frequency must be > 0, got {frequency}")));
        }
        let stored_energy = field.total_energy()?;
        Ok(Self {
            frequency,
            field,
            stored_energy,
            label: label.into(),
        })
    }

    pub fn summary(&self) -> ModeSummary {
        ModeSummary {
            label: self.label.clone(),
            frequency_hz: self.frequency,
            stored_energy_j: self.stored_energy,
        }
    }

    /// True when the recomputed field energy equals the target within `rel`.
    pub fn is_normalized_to(&self, target: f64, rel: f64) -> bool {
        self.field
            .total_energy()
            .map(|e| (e - target).abs() <= rel * target)
            .unwrap_or(false)
    }
}

/// Rescales the mode's fields so that ∫(ε|E|²+μ₀|H|²)/2 dV equals `target`.
pub fn normalize_energy(mode: &ModeSolution, target: f64) -> Result<ModeSolution> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::invalid("energy target", format!("{target} J")));
    }
    let energy = mode.field.total_energy()?;
    if !(energy > 0.0) {
        return Err(Error::Domain("cannot normalize a mode with zero field".into()));
    }
    let factor = (target / energy).sqrt();
    let field = mode.field.scaled(factor);
    Ok(ModeSolution {
        frequency: mode.frequency,
        stored_energy: field.total_energy()?,
        field,
        label: mode.label.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::test_support::uniform_strip;
    use crate::units::EPS0;

    fn mode_with_energy(joules: f64) -> ModeSolution {
        // ε0·E²·V/2 = joules over 10 cells of 1e-9 m³
        let e = (2.0 * joules / (EPS0 * 1e-8)).sqrt();
        ModeSolution::new(5e9, uniform_strip(10, e, 0.0), "m").unwrap()
    }

    #[test]
    fn quadratic_scaling() {
        let m = mode_with_energy(4.0);
        let n = normalize_energy(&m, 1.0).unwrap();
        let ratio = n.field.e_field()[3][2].re / m.field.e_field()[3][2].re;
        assert!((ratio - 0.5).abs() < 1e-15);
        assert!((n.stored_energy - 1.0).abs() < 1e-9);
        assert_eq!(n.frequency, m.frequency);
    }

    #[test]
    fn identity_when_already_normalized() {
        let m = normalize_energy(&mode_with_energy(3.0), 1.0).unwrap();
        let again = normalize_energy(&m, 1.0).unwrap();
        for (a, b) in m.field.e_field().iter().zip(again.field.e_field()) {
            assert!((a[2].re - b[2].re).abs() <= 1e-12 * a[2].re.abs());
        }
    }

    #[test]
    fn zero_field_errors() {
        let m = ModeSolution::new(1e9, uniform_strip(3, 0.0, 0.0), "z").unwrap();
        assert!(normalize_energy(&m, 1.0).is_err());
    }

    #[test]
    fn energy_is_region_relabel_invariant() {
        use crate::field::grid::Region;
        let g = uniform_strip(4, 1.5, 0.2);
        let mut regions = g.regions().to_vec();
        regions.push(Region {
            name: "other".into(),
            material: "Rogers".into(),
            relative_permittivity: Some(2.2),
        });
        let ids = vec![0, 1, 1, 0];
        let g = FieldGrid::new(
            3,
            g.spacing(),
            g.positions().to_vec(),
            g.e_field().to_vec(),
            g.h_field().map(|h| h.to_vec()),
            g.cell_measure().to_vec(),
            ids,
            regions,
            vec![],
        )
        .unwrap();
        let swapped = g.relabeled(&[1, 0]).unwrap();
        let (a, b) = (g.total_energy().unwrap(), swapped.total_energy().unwrap());
        assert!((a - b).abs() <= 1e-15 * a);
    }
}
