use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Pillar, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Triangular,
    Square,
}

/// Regular lattice of candidate pillar sites, thinned by a skip list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PillarLattice {
    pub kind: LatticeKind,
    pub pitch: f64,
    pub pillar_radius: f64,
    /// Pillars are kept only when their whole disc lies within this radius.
    pub extent: f64,
    /// Lattice indices (i, j) left empty.
    pub skip: Vec<(i32, i32)>,
}

impl PillarLattice {
    fn basis(&self) -> [[f64; 2]; 2] {
        let p = self.pitch;
        match self.kind {
            LatticeKind::Triangular => [[p, 0.0], [0.5 * p, 0.5 * 3f64.sqrt() * p]],
            LatticeKind::Square => [[p, 0.0], [0.0, p]],
        }
    }

    /// All candidate sites with their lattice indices, ordered by index.
    pub fn sites(&self) -> Result<Vec<((i32, i32), Point2)>> {
        if !(self.pitch > 0.0 && self.pillar_radius > 0.0 && self.extent > 0.0) {
            return Err(Error::invalid("pillar lattice", "pitch, radius and extent must be > 0"));
        }
        if 2.0 * self.pillar_radius >= self.pitch {
            return Err(Error::invalid("pillar lattice", "pillars would touch their neighbours"));
        }
        let [a, b] = self.basis();
        let reach = (self.extent / (self.pitch * 0.5)).ceil() as i32 + 1;
        let mut out = Vec::new();
        for j in -reach..=reach {
            for i in -reach..=reach {
                let x = i as f64 * a[0] + j as f64 * b[0];
                let y = i as f64 * a[1] + j as f64 * b[1];
                if (x * x + y * y).sqrt() + self.pillar_radius <= self.extent {
                    out.push(((i, j), Point2 { x, y }));
                }
            }
        }
        Ok(out)
    }

    pub fn pillars(&self) -> Result<Vec<Pillar>> {
        Ok(self
            .sites()?
            .into_iter()
            .filter(|(ij, _)| !self.skip.contains(ij))
            .map(|(_, center)| Pillar {
                center,
                radius: self.pillar_radius,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_sites_have_pitch_spacing() {
        let lat = PillarLattice {
            kind: LatticeKind::Triangular,
            pitch: 1.0,
            pillar_radius: 0.1,
            extent: 3.0,
            skip: vec![],
        };
        let sites = lat.sites().unwrap();
        let min_sep = sites
            .iter()
            .flat_map(|a| sites.iter().map(move |b| (a, b)))
            .filter(|(a, b)| a.0 != b.0)
            .map(|(a, b)| a.1.distance(b.1))
            .fold(f64::INFINITY, f64::min);
        assert!((min_sep - 1.0).abs() < 1e-12);
        assert!(sites.iter().all(|(_, p)| p.norm() <= 2.9 + 1e-12));
    }

    #[test]
    fn skip_removes_sites() {
        let lat = PillarLattice {
            kind: LatticeKind::Square,
            pitch: 1.0,
            pillar_radius: 0.1,
            extent: 1.5,
            skip: vec![(0, 0)],
        };
        let all = lat.sites().unwrap().len();
        let kept = lat.pillars().unwrap();
        assert_eq!(kept.len(), all - 1);
        assert!(kept.iter().all(|p| p.center.norm() > 0.5));
    }
}
