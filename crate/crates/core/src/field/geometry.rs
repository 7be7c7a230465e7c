use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("point", format!("({x}, {y}) is not finite")));
        }
        Ok(Self { x, y })
    }

    pub const fn origin() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pillar {
    pub center: Point2,
    pub radius: f64,
}

/// Thin cylindrical cavity between lid and spacer, optionally shorted by
/// conducting pillars and partially filled by the qubit wafer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    radius: f64,
    height: f64,
    pillars: Vec<Pillar>,
    wafer_thickness: f64,
    wafer_permittivity: f64,
}

impl CavityGeometry {
    pub fn new(
        radius: f64,
        height: f64,
        pillars: Vec<Pillar>,
        wafer_thickness: f64,
        wafer_permittivity: f64,
    ) -> Result<Self> {
        let g = Self {
            radius,
            height,
            pillars,
            wafer_thickness,
            wafer_permittivity,
        };
        g.validate()?;
        Ok(g)
    }

    /// Empty (vacuum) disc without pillars.
    pub fn bare_disc(radius: f64, height: f64) -> Result<Self> {
        Self::new(radius, height, Vec::new(), 0.0, 1.0)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid("cavity geometry", m));
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be > 0, got {}", self.radius));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return bad(format!("height must be > 0, got {}", self.height));
        }
        if !(self.wafer_thickness >= 0.0 && self.wafer_thickness < self.height) {
            return bad(format!(
                "wafer thickness {} must lie in [0, height={})",
                self.wafer_thickness, self.height
            ));
        }
        if !(self.wafer_permittivity >= 1.0 && self.wafer_permittivity.is_finite()) {
            return bad(format!("wafer permittivity {} < 1", self.wafer_permittivity));
        }
        for (i, p) in self.pillars.iter().enumerate() {
            if !(p.radius > 0.0 && p.radius.is_finite()) {
                return bad(format!("pillar {i} radius must be > 0"));
            }
            if !p.center.x.is_finite() || !p.center.y.is_finite() {
                return bad(format!("pillar {i} center is not finite"));
            }
            if p.center.norm() + p.radius >= self.radius {
                return bad(format!("pillar {i} touches or crosses the outer wall"));
            }
        }
        for i in 0..self.pillars.len() {
            for j in i + 1..self.pillars.len() {
                let (a, b) = (self.pillars[i], self.pillars[j]);
                if a.center.distance(b.center) <= a.radius + b.radius {
                    return bad(format!("pillars {i} and {j} overlap"));
                }
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn pillars(&self) -> &[Pillar] {
        &self.pillars
    }

    pub fn wafer_thickness(&self) -> f64 {
        self.wafer_thickness
    }

    pub fn wafer_permittivity(&self) -> f64 {
        self.wafer_permittivity
    }

    /// Uniform relative permittivity seen by a field normal to the plates when
    /// the wafer and the vacuum gap act as series capacitors.
    pub fn effective_permittivity(&self) -> f64 {
        let t = self.wafer_thickness;
        self.height / ((self.height - t) + t / self.wafer_permittivity)
    }

    /// True when `p` lies inside the outer disc and outside every pillar.
    pub fn contains(&self, p: Point2) -> bool {
        p.norm() < self.radius
            && self
                .pillars
                .iter()
                .all(|pl| p.distance(pl.center) > pl.radius)
    }

    pub fn with_pillars(&self, pillars: Vec<Pillar>) -> Result<Self> {
        Self::new(
            self.radius,
            self.height,
            pillars,
            self.wafer_thickness,
            self.wafer_permittivity,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pillar(x: f64, y: f64, r: f64) -> Pillar {
        Pillar {
            center: Point2 { x, y },
            radius: r,
        }
    }

    #[test]
    fn effective_permittivity_series_rule() {
        let g = CavityGeometry::new(0.05, 2e-3, vec![], 0.5e-3, 10.0).unwrap();
        let expected = 2e-3 / (1.5e-3 + 0.5e-3 / 10.0);
        assert!((g.effective_permittivity() - expected).abs() < 1e-12);
        assert_eq!(CavityGeometry::bare_disc(1.0, 0.1).unwrap().effective_permittivity(), 1.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(CavityGeometry::bare_disc(0.0, 1.0).is_err());
        assert!(CavityGeometry::new(1.0, 1.0, vec![], 1.0, 10.0).is_err());
        assert!(CavityGeometry::new(1.0, 1.0, vec![], 0.1, 0.5).is_err());
        assert!(CavityGeometry::new(1.0, 1.0, vec![pillar(0.95, 0.0, 0.1)], 0.0, 1.0).is_err());
        assert!(CavityGeometry::new(
            1.0,
            1.0,
            vec![pillar(0.0, 0.0, 0.1), pillar(0.15, 0.0, 0.1)],
            0.0,
            1.0
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn validation_matches_pairwise_geometry(
            pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.01f64..0.3), 1..6)
        ) {
            let pillars: Vec<Pillar> = pts.iter().map(|&(x, y, r)| pillar(x, y, r)).collect();
            let inside = pillars.iter().all(|p| p.center.norm() + p.radius < 1.0);
            let mut disjoint = true;
            for i in 0..pillars.len() {
                for j in i + 1..pillars.len() {
                    if pillars[i].center.distance(pillars[j].center) <= pillars[i].radius + pillars[j].radius {
                        disjoint = false;
                    }
                }
            }
            let result = CavityGeometry::new(1.0, 0.1, pillars, 0.0, 1.0);
            prop_assert_eq!(result.is_ok(), inside && disjoint);
        }
    }
}
