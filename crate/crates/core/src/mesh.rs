//! Triangle meshes of the limit multigraph and CSV samples of the flow.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::VortexConfig;
use crate::error::{Error, Result};
use crate::surface::{self, MultigraphSheet};

/// Grid settings. The grid is the square of half-width `half_width` around
/// the centroid, split into `cells × cells` squares of two triangles each.
/// Grid points within `exclusion` of a vortex are pushed out to that radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshSettings {
    pub half_width: f64,
    pub cells: usize,
    pub turns: usize,
    /// Defaults to `0.05 ×` the minimum separation.
    pub exclusion: Option<f64>,
}

impl MeshSettings {
    /// Square covering every vortex with a margin of one unit.
    pub fn covering(c: &VortexConfig) -> Self {
        let center = c.centroid();
        let reach = c.positions().iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        MeshSettings {
            half_width: 1.5 * reach + 1.0,
            cells: 80,
            turns: 1,
            exclusion: None,
        }
    }

    fn exclusion_for(&self, c: &VortexConfig) -> f64 {
        self.exclusion.unwrap_or_else(|| {
            let d = c.min_separation();
            if d.is_finite() {
                0.05 * d
            } else {
                0.05 * self.half_width
            }
        })
    }

    pub fn validate(&self, c: &VortexConfig) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSettings(m));
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return bad(format!("half_width must be positive, got {}", self.half_width));
        }
        if self.cells == 0 || self.cells > 2000 {
            return bad(format!("cells must be in 1..=2000, got {}", self.cells));
        }
        if self.turns == 0 || self.turns > 64 {
            return bad(format!("turns must be in 1..=64, got {}", self.turns));
        }
        let r0 = self.exclusion_for(c);
        if !(r0 > 0.0) || r0 >= self.half_width {
            return bad(format!("exclusion radius {r0} must lie in (0, half_width)"));
        }
        Ok(())
    }

    /// Grid points per turn.
    pub fn grid_vertices(&self) -> usize {
        (self.cells + 1) * (self.cells + 1)
    }

    /// Triangles per turn before lifting.
    pub fn grid_triangles(&self) -> usize {
        2 * self.cells * self.cells
    }
}

/// Both sheets share the vertex layout; sheet 1 sits `π` above sheet 0.
/// Vertex `k·G + g` is grid point `g` lifted to turn `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Vertical segments over each vortex, one per turn.
    pub segments: Vec<[[f64; 3]; 2]>,
    /// Lifted triangles that would leave the stack of turns.
    pub dropped: usize,
    pub turns: usize,
}

struct Grid {
    points: Vec<Complex64>,
    side: usize,
}

impl Grid {
    fn new(c: &VortexConfig, s: &MeshSettings, r0: f64) -> Grid {
        let center = c.centroid();
        let side = s.cells + 1;
        let h = 2.0 * s.half_width / s.cells as f64;
        let mut points = Vec::with_capacity(side * side);
        for iy in 0..side {
            for ix in 0..side {
                let mut z = center + Complex64::new(-s.half_width + h * ix as f64, -s.half_width + h * iy as f64);
                for p in c.positions() {
                    let d = z - p;
                    if d.norm() < r0 {
                        let dir = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
                        z = p + dir * r0;
                    }
                }
                points.push(z);
            }
        }
        Grid { points, side }
    }

    fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.side + ix
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(2 * (self.side - 1) * (self.side - 1));
        for iy in 0..self.side - 1 {
            for ix in 0..self.side - 1 {
                let a = self.index(ix, iy);
                let b = self.index(ix + 1, iy);
                let c = self.index(ix + 1, iy + 1);
                let d = self.index(ix, iy + 1);
                out.push([a, b, c]);
                out.push([a, c, d]);
            }
        }
        out
    }

    fn neighbours(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        let (ix, iy) = (g % self.side, g / self.side);
        let s = self.side;
        [
            (ix > 0).then(|| g - 1),
            (ix + 1 < s).then(|| g + 1),
            (iy > 0).then(|| g - s),
            (iy + 1 < s).then(|| g + s),
        ]
        .into_iter()
        .flatten()
    }
}

/// Heights of `f` on the grid by continuation along a breadth-first spanning
/// tree from grid point 0.
fn tree_heights(c: &VortexConfig, grid: &Grid, clearance: f64) -> Result<Vec<f64>> {
    let n = grid.points.len();
    let mut h = vec![f64::NAN; n];
    h[0] = surface::principal_height(c, grid.points[0]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(g) = queue.pop_front() {
        for nb in grid.neighbours(g) {
            if !h[nb].is_nan() {
                continue;
            }
            if let Ok(dh) = surface::segment_increment(c, grid.points[g], grid.points[nb], clearance) {
                h[nb] = h[g] + dh;
                queue.push_back(nb);
            }
        }
    }
    if h.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidSettings("grid is disconnected by the exclusion disks".into()));
    }
    Ok(h)
}

/// Sheet 0 of the multigraph over the grid; heights for every turn.
pub fn build_mesh(c: &VortexConfig, s: &MeshSettings) -> Result<Mesh> {
    surface::require_finite(c)?;
    s.validate(c)?;
    let r0 = s.exclusion_for(c);
    let clearance = 0.5 * r0;
    let grid = Grid::new(c, s, r0);
    let heights = tree_heights(c, &grid, clearance)?;
    let g_count = grid.points.len();
    let mut vertices = Vec::with_capacity(g_count * s.turns);
    for k in 0..s.turns {
        for (z, h) in grid.points.iter().zip(&heights) {
            vertices.push([z.re, z.im, h + 2.0 * PI * k as f64]);
        }
    }
    let mut faces = Vec::new();
    let mut dropped = 0;
    for tri in grid.triangles() {
        // local continuation from the first corner fixes the turn offsets
        let mut offsets = [0i64; 3];
        let mut ok = true;
        for m in 1..3 {
            match surface::segment_increment(c, grid.points[tri[0]], grid.points[tri[m]], clearance) {
                Ok(dh) => {
                    let w = (heights[tri[0]] + dh - heights[tri[m]]) / (2.0 * PI);
                    offsets[m] = w.round() as i64;
                }
                Err(_) => ok = false,
            }
        }
        if !ok {
            dropped += s.turns;
            continue;
        }
        let lo = *offsets.iter().min().unwrap_or(&0);
        let hi = *offsets.iter().max().unwrap_or(&0);
        for k in 0..s.turns as i64 {
            if k + lo < 0 || k + hi >= s.turns as i64 {
                dropped += 1;
                continue;
            }
            let lift = |m: usize| (k + offsets[m]) as usize * g_count + tri[m];
            faces.push([lift(0), lift(1), lift(2)]);
        }
    }
    let base = heights[0] - heights[0].rem_euclid(2.0 * PI);
    let segments = c
        .positions()
        .iter()
        .flat_map(|p| {
            (0..s.turns).map(move |k| {
                let z0 = base + 2.0 * PI * k as f64;
                [[p.re, p.im, z0], [p.re, p.im, z0 + 2.0 * PI]]
            })
        })
        .collect();
    Ok(Mesh {
        vertices,
        faces,
        segments,
        dropped,
        turns: s.turns,
    })
}

impl Mesh {
    /// Samples of one branch at the turn-0 vertices.
    pub fn sheet(&self, branch: u8, markers: Vec<Complex64>) -> MultigraphSheet {
        let shift = if branch == 0 { 0.0 } else { PI };
        let per_turn = self.vertices.len() / self.turns.max(1);
        MultigraphSheet {
            branch,
            turns: self.turns,
            samples: self.vertices[..per_turn]
                .iter()
                .map(|v| (Complex64::new(v[0], v[1]), v[2] + shift))
                .collect(),
            markers,
        }
    }

    /// Wavefront OBJ with objects `sheet0` and `sheet1`.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let nv = self.vertices.len();
        for (sheet, shift) in [(0, 0.0), (1, PI)] {
            let _ = writeln!(out, "o sheet{sheet}");
            for v in &self.vertices {
                let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", v[0], v[1], v[2] + shift);
            }
            for f in &self.faces {
                let off = sheet * nv + 1;
                let _ = writeln!(out, "f {} {} {}", f[0] + off, f[1] + off, f[2] + off);
            }
        }
        out
    }

    /// OBJ polylines for the vertical segments.
    pub fn segments_obj(&self) -> String {
        let mut out = String::from("o vortex_lines\n");
        for s in &self.segments {
            for v in s {
                let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", v[0], v[1], v[2]);
            }
        }
        for k in 0..self.segments.len() {
            let _ = writeln!(out, "l {} {}", 2 * k + 1, 2 * k + 2);
        }
        out
    }
}

/// `x,y,u_re,u_im` rows on an `nx × ny` grid over `[x0, x1] × [y0, y1]`.
/// Points on a vortex are skipped.
pub fn field_csv(c: &VortexConfig, x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<String> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidSettings("field grid needs at least 2 × 2 points".into()));
    }
    let mut out = String::from("x,y,u_re,u_im\n");
    for j in 0..ny {
        let yy = y.0 + (y.1 - y.0) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let xx = x.0 + (x.1 - x.0) * i as f64 / (nx - 1) as f64;
            match surface::flow_field(Complex64::new(xx, yy), c) {
                Ok(u) => {
                    let _ = writeln!(out, "{xx:.16e},{yy:.16e},{:.16e},{:.16e}", u.re, u.im);
                }
                Err(Error::SingularInput { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::kernels::GeometryKind;

    #[test]
    fn counts_follow_settings() {
        let (c, _) = catalog::vortex_pair();
        let s = MeshSettings {
            half_width: 1.0,
            cells: 10,
            turns: 2,
            exclusion: None,
        };
        let mesh = build_mesh(&c, &s).unwrap();
        assert_eq!(mesh.vertices.len(), 2 * s.grid_vertices());
        assert_eq!(mesh.faces.len() + mesh.dropped, 2 * s.grid_triangles());
        assert_eq!(mesh.segments.len(), 4);
    }

    #[test]
    fn heights_match_path_continuation() {
        let (c, _) = catalog::vortex_pair();
        let s = MeshSettings {
            half_width: 0.5,
            cells: 8,
            turns: 1,
            exclusion: None,
        };
        let mesh = build_mesh(&c, &s).unwrap();
        // the tree reaches the first row by straight moves along it
        for ix in 0..=8 {
            let path: Vec<_> = (0..=ix).map(|k| Complex64::new(mesh.vertices[k][0], mesh.vertices[k][1])).collect();
            let h = surface::multigraph_height(&path, &c).unwrap();
            assert!((mesh.vertices[ix][2] - h).abs() < 1e-12);
        }
        let s1 = mesh.sheet(1, vec![]);
        assert!((s1.samples[3].1 - mesh.vertices[3][2] - PI).abs() < 1e-15);
    }

    #[test]
    fn single_vortex_cut_spans_one_turn() {
        let cfg = VortexConfig::from_parts(GeometryKind::Finite, &[Complex64::new(0.0, 0.0)], &[1]).unwrap();
        let s = MeshSettings {
            half_width: 1.0,
            cells: 7,
            turns: 3,
            exclusion: Some(0.05),
        };
        let mesh = build_mesh(&cfg, &s).unwrap();
        let obj = mesh.to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("o ")).count(), 2);
        assert!(mesh.dropped > 0 && mesh.dropped < s.grid_triangles());
        let csv = field_csv(&cfg, (-1.0, 1.0), (-1.0, 1.0), 3, 3).unwrap();
        // the centre sample sits on the vortex
        assert_eq!(csv.lines().count(), 1 + 8);
    }

    #[test]
    fn rejects_bad_settings() {
        let (c, _) = catalog::vortex_pair();
        let mut s = MeshSettings::covering(&c);
        s.cells = 0;
        assert!(matches!(build_mesh(&c, &s), Err(Error::InvalidSettings(_))));
    }
}
