use serde::Serialize;

use crate::error::{Error, Result};
use crate::readout::dataset::{IQDataset, Prepared};

/// Shots projected onto the line through the two preparation centroids,
/// with the midpoint at 0 and the ground centroid on the negative side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projected {
    pub ground: Vec<f64>,
    pub excited: Vec<f64>,
    /// Unit vector from the ground to the excited centroid in the IQ plane.
    pub axis: [f64; 2],
    /// IQ point mapped to 0 V.
    pub midpoint: [f64; 2],
}

impl Projected {
    /// Projects an arbitrary IQ point into the same frame.
    pub fn project(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.midpoint[0]) * self.axis[0] + (p[1] - self.midpoint[1]) * self.axis[1]
    }
}

fn centroid(ds: &IQDataset, state: Prepared) -> Option<[f64; 2]> {
    let (mut n, mut si, mut sq) = (0usize, 0.0, 0.0);
    for s in ds.shots.iter().filter(|s| s.prepared == state) {
        n += 1;
        si += s.i;
        sq += s.q;
    }
    (n > 0).then(|| [si / n as f64, sq / n as f64])
}

pub fn project_shots(ds: &IQDataset) -> Result<Projected> {
    let missing = |s: Prepared| Error::Domain(format!("qubit {}: no {s}-prepared shots", ds.qubit_id));
    let g = centroid(ds, Prepared::Ground).ok_or_else(|| missing(Prepared::Ground))?;
    let e = centroid(ds, Prepared::Excited).ok_or_else(|| missing(Prepared::Excited))?;
    let d = [e[0] - g[0], e[1] - g[1]];
    let len = d[0].hypot(d[1]);
    let scale = g[0].abs().max(g[1].abs()).max(e[0].abs()).max(e[1].abs());
    if !(len > 1e-12 * scale) || len == 0.0 {
        return Err(Error::Domain(format!(
            "qubit {}: coincident centroids, discrimination axis undefined",
            ds.qubit_id
        )));
    }
    let mut p = Projected {
        ground: Vec::new(),
        excited: Vec::new(),
        axis: [d[0] / len, d[1] / len],
        midpoint: [0.5 * (g[0] + e[0]), 0.5 * (g[1] + e[1])],
    };
    for s in &ds.shots {
        let v = p.project([s.i, s.q]);
        match s.prepared {
            Prepared::Ground => p.ground.push(v),
            Prepared::Excited => p.excited.push(v),
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::readout::dataset::Shot;

    fn ds(points: &[(Prepared, f64, f64)]) -> IQDataset {
        IQDataset {
            qubit_id: "q".into(),
            shots: points.iter().map(|&(prepared, i, q)| Shot { prepared, i, q }).collect(),
            readout_duration: 1e-6,
            qubit_frequency: 5e9,
            t1_reference: None,
        }
    }

    #[test]
    fn axis_aligned_clouds() {
        let p = project_shots(&ds(&[(Prepared::Ground, 1.0, 0.0), (Prepared::Excited, 3.0, 0.0)])).unwrap();
        assert_eq!(p.ground, vec![-1.0]);
        assert_eq!(p.excited, vec![1.0]);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(project_shots(&ds(&[(Prepared::Ground, 1.0, 0.0)])).is_err());
        assert!(project_shots(&ds(&[(Prepared::Ground, 1.0, 2.0), (Prepared::Excited, 1.0, 2.0)])).is_err());
    }
}
