//! Finite-difference discretization of the Dirichlet Laplacian on the disc
//! minus pillar discs. Nodes sit at (i·h, j·h); nodes on or outside a wall are
//! eliminated and the wall position enters through the symmetric cut-cell
//! stencil (missing neighbour at distance θh adds 1/(θh²) to the diagonal).

use crate::cavity::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::field::{CavityGeometry, Point2};

/// Smallest wall distance fraction kept in the stencil.
const THETA_MIN: f64 = 1e-3;

pub(crate) const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Wall {
    Outer,
    Pillar(usize),
}

impl Wall {
    pub(crate) fn label(self) -> String {
        match self {
            Wall::Outer => "outer_wall".to_string(),
            Wall::Pillar(k) => format!("pillar_{k}"),
        }
    }
}

/// A grid line leaving the domain between an interior node and a wall.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Crossing {
    pub node: usize,
    pub dir: usize,
    pub theta: f64,
    pub wall: Wall,
}

pub(crate) struct Discretization {
    pub h: f64,
    /// Integer coordinates of each unknown.
    pub coords: Vec<(i64, i64)>,
    pub half_width: i64,
    /// Dense lookup over the bounding box: unknown index or `usize::MAX`.
    lookup: Vec<usize>,
    pub matrix: CsrMatrix,
    pub crossings: Vec<Crossing>,
}

impl Discretization {
    pub fn position(&self, node: usize) -> Point2 {
        let (i, j) = self.coords[node];
        Point2 {
            x: i as f64 * self.h,
            y: j as f64 * self.h,
        }
    }

    pub fn index(&self, i: i64, j: i64) -> Option<usize> {
        let w = self.half_width;
        if i.abs() > w || j.abs() > w {
            return None;
        }
        let k = self.lookup[((j + w) * (2 * w + 1) + (i + w)) as usize];
        (k != usize::MAX).then_some(k)
    }

    /// Distance (in units of h) from `node` to the wall along direction `dir`,
    /// or 1 when the neighbour is itself an unknown.
    pub fn arm(&self, node: usize, dir: usize) -> (f64, Option<usize>) {
        let (i, j) = self.coords[node];
        let (di, dj) = DIRS[dir];
        match self.index(i + di, j + dj) {
            Some(n) => (1.0, Some(n)),
            None => {
                let c = self
                    .crossings_of(node)
                    .find(|c| c.dir == dir)
                    .expect("missing neighbour always has a crossing");
                (c.theta, None)
            }
        }
    }

    fn crossings_of(&self, node: usize) -> impl Iterator<Item = &Crossing> {
        let start = self.crossings.partition_point(|c| c.node < node);
        self.crossings[start..].iter().take_while(move |c| c.node == node)
    }
}

/// First wall hit travelling from `p` along the axis direction `d` within
/// distance `reach`.
fn first_hit(geometry: &CavityGeometry, p: Point2, d: (f64, f64), reach: f64) -> Option<(f64, Wall)> {
    let mut best: Option<(f64, Wall)> = None;
    let mut consider = |t: f64, wall: Wall| {
        if t >= 0.0 && t <= reach * (1.0 + 1e-12) && best.is_none_or(|(b, _)| t < b) {
            best = Some((t, wall));
        }
    };
    // outer circle, p inside
    let b = d.0 * p.x + d.1 * p.y;
    let cc = p.x * p.x + p.y * p.y - geometry.radius().powi(2);
    let disc = b * b - cc;
    if disc >= 0.0 {
        consider(-b + disc.sqrt(), Wall::Outer);
    }
    for (k, pl) in geometry.pillars().iter().enumerate() {
        let (rx, ry) = (p.x - pl.center.x, p.y - pl.center.y);
        let b = d.0 * rx + d.1 * ry;
        let cc = rx * rx + ry * ry - pl.radius * pl.radius;
        let disc = b * b - cc;
        if disc >= 0.0 {
            let t = -b - disc.sqrt();
            consider(t, Wall::Pillar(k));
        }
    }
    best
}

pub(crate) fn discretize(geometry: &CavityGeometry, h: f64) -> Result<Discretization> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("grid spacing", format!("{h} m")));
    }
    if let Some((k, pl)) = geometry
        .pillars()
        .iter()
        .enumerate()
        .find(|(_, pl)| pl.radius < 4.0 * h * (1.0 - 1e-12))
    {
        return Err(Error::Domain(format!(
            "grid too coarse for pillar {k}: radius {:.4e} m spans {:.2} cells, need at least 4",
            pl.radius,
            pl.radius / h
        )));
    }
    let half_width = (geometry.radius() / h).ceil() as i64 + 1;
    if half_width < 4 {
        return Err(Error::Domain("grid too coarse for the cavity radius".into()));
    }
    let side = (2 * half_width + 1) as usize;
    let mut lookup = vec![usize::MAX; side * side];
    let mut coords = Vec::new();
    for j in -half_width..=half_width {
        for i in -half_width..=half_width {
            let p = Point2 {
                x: i as f64 * h,
                y: j as f64 * h,
            };
            if geometry.contains(p) {
                lookup[((j + half_width) as usize) * side + (i + half_width) as usize] = coords.len();
                coords.push((i, j));
            }
        }
    }
    if coords.is_empty() {
        return Err(Error::Domain("no grid nodes inside the cavity".into()));
    }
    let mut disc = Discretization {
        h,
        coords,
        half_width,
        lookup,
        matrix: CsrMatrix::from_rows(Vec::new()),
        crossings: Vec::new(),
    };
    let inv_h2 = 1.0 / (h * h);
    let mut rows = Vec::with_capacity(disc.coords.len());
    let mut crossings = Vec::new();
    for node in 0..disc.coords.len() {
        let (i, j) = disc.coords[node];
        let p = disc.position(node);
        let mut row = Vec::with_capacity(5);
        let mut diag = 0.0;
        for (dir, &(di, dj)) in DIRS.iter().enumerate() {
            match disc.index(i + di, j + dj) {
                Some(nb) => {
                    row.push((nb, -inv_h2));
                    diag += inv_h2;
                }
                None => {
                    let (t, wall) =
                        first_hit(geometry, p, (di as f64, dj as f64), h).unwrap_or((h, Wall::Outer));
                    let theta = (t / h).clamp(THETA_MIN, 1.0);
                    diag += inv_h2 / theta;
                    crossings.push(Crossing {
                        node,
                        dir,
                        theta,
                        wall,
                    });
                }
            }
        }
        row.push((node, diag));
        rows.push(row);
    }
    disc.matrix = CsrMatrix::from_rows(rows);
    disc.crossings = crossings;
    Ok(disc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Pillar;

    #[test]
    fn matrix_is_symmetric_with_pillars() {
        let g = CavityGeometry::bare_disc(1.0, 0.1)
            .unwrap()
            .with_pillars(vec![Pillar {
                center: Point2 { x: 0.3, y: 0.1 },
                radius: 0.2,
            }])
            .unwrap();
        let d = discretize(&g, 0.04).unwrap();
        assert!(d.matrix.is_symmetric(1e-14));
        assert!(d.crossings.iter().any(|c| c.wall == Wall::Pillar(0)));
        assert!(d.crossings.iter().all(|c| c.theta > 0.0 && c.theta <= 1.0));
    }

    #[test]
    fn crossings_lie_on_walls() {
        let g = CavityGeometry::bare_disc(1.0, 0.1).unwrap();
        let d = discretize(&g, 0.05).unwrap();
        for c in &d.crossings {
            let p = d.position(c.node);
            let (di, dj) = DIRS[c.dir];
            let q = (p.x + di as f64 * c.theta * d.h, p.y + dj as f64 * c.theta * d.h);
            if c.theta > THETA_MIN {
                assert!(((q.0 * q.0 + q.1 * q.1).sqrt() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_pillar_rejected() {
        let g = CavityGeometry::bare_disc(1.0, 0.1)
            .unwrap()
            .with_pillars(vec![Pillar {
                center: Point2::origin(),
                radius: 0.05,
            }])
            .unwrap();
        assert!(matches!(discretize(&g, 0.02), Err(Error::Domain(_))));
        assert!(discretize(&g, 0.0125).is_ok());
    }
}
