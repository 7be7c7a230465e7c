use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::discretize::{discretize, Discretization, Wall, DIRS};
use crate::cavity::lanczos::{block_lanczos, LanczosParams};
use crate::cavity::sparse::{nested_dissection, LdlFactor};
use crate::error::{Error, Result};
use crate::field::{
    normalize_energy, BoundaryCell, CavityGeometry, FieldGrid, MaterialTable, ModeSolution,
    Property, Region, Vec3c,
};
use crate::units::{C0, MU0};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid_spacing: f64,
    pub num_modes: usize,
    /// Spectral target in Hz; the modes nearest this frequency are returned.
    pub shift: f64,
    /// Maximum number of block Lanczos steps.
    pub max_iterations: usize,
    /// Relative eigen-residual tolerance.
    pub tolerance: f64,
    /// Material name used for the wafer layer of exported fields.
    pub wafer_material: String,
}

impl SolverConfig {
    pub fn new(grid_spacing: f64, num_modes: usize) -> Self {
        Self {
            grid_spacing,
            num_modes,
            shift: 0.0,
            max_iterations: 300,
            tolerance: 1e-8,
            wafer_material: "sapphire".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid("solver config", m));
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return bad(format!("grid_spacing must be > 0, got {}", self.grid_spacing));
        }
        if self.num_modes == 0 {
            return bad("num_modes must be at least 1".into());
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return bad(format!("tolerance must be in (0, 1e-2], got {}", self.tolerance));
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return bad(format!("shift must be a non-negative frequency, got {}", self.shift));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    /// Ascending in frequency.
    pub modes: Vec<ModeSolution>,
    pub geometry: CavityGeometry,
    pub config: SolverConfig,
    /// Degeneracy group index per mode; near-equal frequencies share a group.
    pub groups: Vec<usize>,
    /// Out-of-plane field ψ per unknown for each mode, unit L² norm.
    pub(crate) shapes: Vec<Vec<f64>>,
    pub unknowns: usize,
    /// Krylov basis size at convergence.
    pub krylov_dimension: usize,
}

impl ModeSpectrum {
    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.frequency).collect()
    }

    /// Frequency above which modes with vertical variation exist and the
    /// planar model stops being complete.
    pub fn validity_ceiling(&self) -> f64 {
        C0 / (2.0 * self.geometry.height() * self.geometry.effective_permittivity().sqrt())
    }

    pub fn fundamental(&self) -> Option<f64> {
        self.modes.first().map(|m| m.frequency)
    }

    pub fn shape(&self, mode: usize) -> &[f64] {
        &self.shapes[mode]
    }
}

fn sign_normalize(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    let abs: f64 = v.iter().map(|x| x.abs()).sum();
    let flip = if sum.abs() > 1e-8 * abs {
        sum < 0.0
    } else {
        let k = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(k, _)| k)
            .unwrap_or(0);
        v[k] < 0.0
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn moments(disc: &Discretization, v: &[f64]) -> [f64; 3] {
    let mut m = [0.0; 3];
    for (node, &psi) in v.iter().enumerate() {
        let p = disc.position(node);
        m[0] += psi * p.x;
        m[1] += psi * p.y;
        m[2] += psi * p.x * p.y;
    }
    m
}

/// Solves the planar Helmholtz problem for the cavity's TM modes.
pub fn solve_modes(geometry: &CavityGeometry, materials: &MaterialTable, config: &SolverConfig) -> Result<ModeSpectrum> {
    config.validate()?;
    if geometry.wafer_thickness() > 0.0 {
        if let Some(eps) = materials.try_get(&config.wafer_material, Property::RelativePermittivity) {
            if (eps - geometry.wafer_permittivity()).abs() > 1e-9 * eps {
                return Err(Error::invalid(
                    "wafer permittivity",
                    format!(
                        "geometry declares {} but material '{}' has {}",
                        geometry.wafer_permittivity(),
                        config.wafer_material,
                        eps
                    ),
                ));
            }
        }
    }
    let disc = discretize(geometry, config.grid_spacing)?;
    let n = disc.coords.len();
    let eps_eff = geometry.effective_permittivity();
    let k_shift = 2.0 * PI * config.shift / C0;
    let sigma = k_shift * k_shift * eps_eff;
    let factor = LdlFactor::new(&disc.matrix, sigma, nested_dissection(&disc.coords))?;
    let params = LanczosParams {
        nev: config.num_modes.min(n),
        block: 2,
        tol: config.tolerance,
        max_steps: config.max_iterations,
        seed: 0x5eed_cafe,
    };
    let ritz = block_lanczos(n, |x, y| factor.solve(x, y), &params)?;

    let krylov = ritz.basis_size;
    let mut pairs: Vec<(f64, Vec<f64>)> = ritz
        .values
        .iter()
        .zip(ritz.vectors)
        .map(|(&theta, v)| (sigma + 1.0 / theta, v))
        .collect();
    if let Some((mu, _)) = pairs.iter().find(|(mu, _)| !(*mu > 0.0)) {
        return Err(Error::Domain(format!("non-positive Laplacian eigenvalue {mu}")));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let freq = |mu: f64| C0 * mu.sqrt() / (2.0 * PI * eps_eff.sqrt());

    // degeneracy groups, then deterministic order inside each group
    let mut groups = Vec::with_capacity(pairs.len());
    let mut g = 0;
    for k in 0..pairs.len() {
        if k > 0 {
            let (a, b) = (freq(pairs[k - 1].0), freq(pairs[k].0));
            if (b - a) > 10.0 * config.tolerance * b {
                g += 1;
            }
        }
        groups.push(g);
    }
    for (_, v) in pairs.iter_mut() {
        sign_normalize(v);
    }
    let mut start = 0;
    while start < pairs.len() {
        let end = (start..pairs.len()).find(|&k| groups[k] != groups[start]).unwrap_or(pairs.len());
        if end - start > 1 {
            let slice = &mut pairs[start..end];
            slice.sort_by(|a, b| {
                let (ma, mb) = (moments(&disc, &a.1), moments(&disc, &b.1));
                mb.iter()
                    .zip(&ma)
                    .map(|(y, x)| y.total_cmp(x))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        }
        start = end;
    }

    let layout = Layout::new(geometry, &config.wafer_material);
    let mut modes = Vec::with_capacity(pairs.len());
    for (k, (mu, psi)) in pairs.iter().enumerate() {
        let f = freq(*mu);
        let field = build_field(&disc, &layout, psi, f)?;
        let label = format!("mode_{:02}", k + 1);
        let raw = ModeSolution::new(f, field, label)?;
        modes.push(normalize_energy(&raw, 1.0)?);
    }
    Ok(ModeSpectrum {
        modes,
        geometry: geometry.clone(),
        config: config.clone(),
        groups,
        shapes: pairs.into_iter().map(|(_, v)| v).collect(),
        unknowns: n,
        krylov_dimension: krylov,
    })
}

/// Vertical structure of an exported mode: a wafer layer on the floor (when
/// present) under the vacuum gap. The displacement field is continuous
/// across the layers.
struct Layout {
    height: f64,
    eps_eff: f64,
    pillars: Vec<(f64, f64)>,
    /// (thickness, relative permittivity, region name, material, z centre)
    layers: Vec<(f64, f64, &'static str, String, f64)>,
}

impl Layout {
    fn new(geometry: &CavityGeometry, wafer_material: &str) -> Self {
        let t = geometry.wafer_thickness();
        let height = geometry.height();
        let mut layers = Vec::new();
        if t > 0.0 {
            layers.push((t, geometry.wafer_permittivity(), "wafer", wafer_material.to_string(), 0.5 * t));
        }
        layers.push((height - t, 1.0, "gap", "vacuum".to_string(), t + 0.5 * (height - t)));
        Self {
            height,
            eps_eff: geometry.effective_permittivity(),
            pillars: geometry.pillars().iter().map(|p| (p.center.x, p.center.y)).collect(),
            layers,
        }
    }
}

fn build_field(disc: &Discretization, layout: &Layout, psi: &[f64], frequency: f64) -> Result<FieldGrid> {
    let h = disc.h;
    let n = psi.len();
    let omega = 2.0 * PI * frequency;
    let zero = Complex64::new(0.0, 0.0);
    let nl = layout.layers.len();
    let gap_layer = nl - 1;

    // in-plane gradient with the wall value 0 placed at θh
    let gradient = |node: usize| -> [f64; 2] {
        let mut g = [0.0; 2];
        for axis in 0..2 {
            let (tp, np) = disc.arm(node, 2 * axis);
            let (tm, nm) = disc.arm(node, 2 * axis + 1);
            let (hp, hm) = (tp * h, tm * h);
            let up = np.map_or(0.0, |k| psi[k]);
            let um = nm.map_or(0.0, |k| psi[k]);
            let u0 = psi[node];
            g[axis] = (hm * hm * up - hp * hp * um + (hp * hp - hm * hm) * u0) / (hp * hm * (hp + hm));
        }
        g
    };

    let mut positions = Vec::with_capacity(n * nl);
    let mut e_field: Vec<Vec3c> = Vec::with_capacity(n * nl);
    let mut h_field: Vec<Vec3c> = Vec::with_capacity(n * nl);
    let mut measure = Vec::with_capacity(n * nl);
    let mut region_id = Vec::with_capacity(n * nl);
    let mut boundary = Vec::new();
    let cell = |node: usize, layer: usize| node * nl + layer;

    for node in 0..n {
        let p = disc.position(node);
        let [gx, gy] = gradient(node);
        let hv = [
            Complex64::new(0.0, gy / (omega * MU0)),
            Complex64::new(0.0, -gx / (omega * MU0)),
            zero,
        ];
        for (l, (t, eps, _, _, zc)) in layout.layers.iter().enumerate() {
            positions.push([p.x, p.y, *zc]);
            e_field.push([zero, zero, Complex64::new(psi[node] * layout.eps_eff / eps, 0.0)]);
            h_field.push(hv);
            measure.push(h * h * t);
            region_id.push(l as u32);
        }
        boundary.push(BoundaryCell {
            cell: cell(node, 0),
            normal: [0.0, 0.0, -1.0],
            area: h * h,
            label: "floor".into(),
            position: [p.x, p.y, 0.0],
        });
        boundary.push(BoundaryCell {
            cell: cell(node, gap_layer),
            normal: [0.0, 0.0, 1.0],
            area: h * h,
            label: "lid".into(),
            position: [p.x, p.y, layout.height],
        });
        if nl > 1 {
            let t = layout.layers[0].0;
            boundary.push(BoundaryCell {
                cell: cell(node, gap_layer),
                normal: [0.0, 0.0, -1.0],
                area: h * h,
                label: "wafer_top".into(),
                position: [p.x, p.y, t],
            });
        }
    }

    // Side walls: one entry per grid line crossing, weighted so that the
    // entries of a wall sum to its true area.
    let mut walls: Vec<(String, f64, BoundaryCell)> = Vec::new();
    for c in &disc.crossings {
        let p = disc.position(c.node);
        let (di, dj) = DIRS[c.dir];
        let q = [p.x + di as f64 * c.theta * h, p.y + dj as f64 * c.theta * h];
        let (normal, angle) = match c.wall {
            Wall::Outer => {
                let r = (q[0] * q[0] + q[1] * q[1]).sqrt();
                ([q[0] / r, q[1] / r], q[1].atan2(q[0]))
            }
            Wall::Pillar(k) => {
                let pl = layout.pillars[k];
                let v = [pl.0 - q[0], pl.1 - q[1]];
                let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
                ([v[0] / r, v[1] / r], (-v[1]).atan2(-v[0]))
            }
        };
        let along = (normal[0] * di as f64 + normal[1] * dj as f64).abs();
        if along <= 0.0 {
            continue;
        }
        walls.push((
            c.wall.label(),
            angle,
            BoundaryCell {
                cell: cell(c.node, gap_layer),
                normal: [normal[0], normal[1], 0.0],
                area: h * along * layout.height,
                label: c.wall.label(),
                position: [q[0], q[1], 0.5 * layout.height],
            },
        ));
    }
    walls.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    boundary.extend(walls.into_iter().map(|(_, _, b)| b));

    let regions = layout
        .layers
        .iter()
        .map(|(_, eps, name, material, _)| Region {
            name: name.to_string(),
            material: material.clone(),
            relative_permittivity: Some(*eps),
        })
        .collect();
    FieldGrid::new(3, [h, h, layout.height], positions, e_field, Some(h_field), measure, region_id, regions, boundary)
}
