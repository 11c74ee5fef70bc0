//! Load cases defined geometrically and their conversion to nodal data.

use crate::error::{Error, Result};
use crate::geometry::NodeOverride;
use crate::mesh::{Aabb, Grid, HyperMesh};

/// Concentrated force at a hyper-mesh node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    pub point: [f64; 3],
    /// Force component index (0 = x, 1 = y, 2 = z).
    pub direction: usize,
    pub magnitude: f64,
}

/// Constant traction (force per unit boundary length/area) on the part of
/// the domain boundary inside `region`, which must be flat along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traction {
    pub region: Aabb,
    pub direction: usize,
    pub density: f64,
}

/// Homogeneous Dirichlet condition on the listed displacement components of
/// every hyper-mesh node inside `region`.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub region: Aabb,
    pub components: Vec<usize>,
}

/// Region selecting background cells by their centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Box(Aabb),
    /// Circular cylinder along coordinate `axis` through `center`, limited
    /// to `lo..=hi` along the axis.
    Cylinder { axis: usize, center: [f64; 3], radius: f64, lo: f64, hi: f64 },
}

impl Region {
    pub fn contains(&self, x: [f64; 3], dim: usize) -> bool {
        match *self {
            Region::Box(b) => (0..dim).all(|d| x[d] >= b.lo[d] && x[d] <= b.hi[d]),
            Region::Cylinder { axis, center, radius, lo, hi } => {
                let r2: f64 = (0..dim).filter(|&d| d != axis).map(|d| (x[d] - center[d]).powi(2)).sum();
                x[axis] >= lo && x[axis] <= hi && r2 <= radius * radius
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadCase {
    pub point_loads: Vec<PointLoad>,
    pub tractions: Vec<Traction>,
    pub supports: Vec<Support>,
    /// Background cells whose centers fall in these regions are non-design solid.
    pub fixed_solid: Vec<Region>,
    /// Background cells whose centers fall in these regions are non-design void.
    pub fixed_void: Vec<Region>,
}

fn coord_tol(grid: &Grid) -> f64 {
    1e-9 * grid.min_spacing()
}

/// Consistent nodal force vector over hyper-mesh dofs (node-major).
pub fn distribute_load(load: &LoadCase, mesh: &HyperMesh) -> Result<Vec<f64>> {
    let grid = mesh.coarse();
    let dim = grid.dim();
    let mut f = vec![0.0; mesh.num_dofs()];
    for pl in &load.point_loads {
        if pl.direction >= dim {
            return Err(Error::InvalidLoad(format!("load direction {} in a {dim}D problem", pl.direction)));
        }
        let node = grid
            .node_at(pl.point, 1e-6 * grid.min_spacing())
            .ok_or_else(|| Error::InvalidLoad(format!("point load at {:?} is not on a hyper-mesh node", pl.point)))?;
        f[node * dim + pl.direction] += pl.magnitude;
    }
    for t in &load.tractions {
        add_traction(t, grid, &mut f)?;
    }
    Ok(f)
}

fn add_traction(t: &Traction, grid: &Grid, f: &mut [f64]) -> Result<()> {
    let dim = grid.dim();
    if t.direction >= dim {
        return Err(Error::InvalidLoad(format!("traction direction {} in a {dim}D problem", t.direction)));
    }
    let tol = coord_tol(grid);
    let lengths = grid.lengths();
    let cells = grid.cells();
    let h = grid.spacing();
    let axis = (0..dim)
        .find(|&d| {
            (t.region.hi[d] - t.region.lo[d]).abs() <= tol
                && (t.region.lo[d].abs() <= tol || (t.region.lo[d] - lengths[d]).abs() <= tol)
        })
        .ok_or_else(|| Error::InvalidLoad(format!("traction region {:?} is not on the domain boundary", t.region)))?;
    let plane = if t.region.lo[axis].abs() <= tol { 0 } else { cells[axis] };
    let others: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
    let facet_nodes = 1usize << others.len();
    let facet_measure: f64 = others.iter().map(|&d| h[d]).product();
    let share = t.density * facet_measure / facet_nodes as f64;
    let count = [cells[others[0]], if others.len() > 1 { cells[others[1]] } else { 1 }];
    let mut loaded = 0;
    for b in 0..count[1] {
        for a in 0..count[0] {
            let idx = [a, b];
            let inside = others.iter().enumerate().all(|(o, &d)| {
                let lo = idx[o] as f64 * h[d];
                let hi = (idx[o] + 1) as f64 * h[d];
                lo >= t.region.lo[d] - tol && hi <= t.region.hi[d] + tol
            });
            if !inside {
                continue;
            }
            loaded += 1;
            for corner in 0..facet_nodes {
                let mut ijk = [0usize; 3];
                ijk[axis] = plane;
                for (o, &d) in others.iter().enumerate() {
                    ijk[d] = idx[o] + ((corner >> o) & 1);
                }
                let node = grid.node_index(ijk[0], ijk[1], ijk[2]);
                f[node * dim + t.direction] += share;
            }
        }
    }
    if loaded == 0 {
        return Err(Error::InvalidLoad(format!("traction region {:?} covers no boundary facet", t.region)));
    }
    Ok(())
}

/// Per-dof flag marking homogeneous Dirichlet constraints.
pub fn constrained_dofs(load: &LoadCase, mesh: &HyperMesh) -> Result<Vec<bool>> {
    let grid = mesh.coarse();
    let dim = grid.dim();
    let mut fixed = vec![false; mesh.num_dofs()];
    for s in &load.supports {
        let nodes = grid.nodes_in_box(s.region.lo, s.region.hi);
        if nodes.is_empty() {
            return Err(Error::InvalidLoad(format!("support region {:?} contains no hyper-mesh node", s.region)));
        }
        for &c in &s.components {
            if c >= dim {
                return Err(Error::InvalidLoad(format!("support component {c} in a {dim}D problem")));
            }
            for &n in &nodes {
                fixed[n * dim + c] = true;
            }
        }
    }
    Ok(fixed)
}

/// Background-node overrides implementing non-design solid and void cells.
/// Returns `None` when the load case has no non-design regions.
pub fn node_overrides(load: &LoadCase, grid: &Grid) -> Option<Vec<NodeOverride>> {
    if load.fixed_solid.is_empty() && load.fixed_void.is_empty() {
        return None;
    }
    let mut ov = vec![NodeOverride::Free; grid.num_nodes()];
    // void first so that overlapping solid regions win
    for (boxes, kind) in [(&load.fixed_void, NodeOverride::Void), (&load.fixed_solid, NodeOverride::Solid)] {
        if boxes.is_empty() {
            continue;
        }
        for c in 0..grid.num_cells() {
            let x = grid.cell_center(c);
            if boxes.iter().any(|r| r.contains(x, grid.dim())) {
                let [i, j, k] = grid.cell_ijk(c);
                for &n in &grid.cell_corners(i, j, k)[..grid.corners_per_cell()] {
                    ov[n] = kind;
                }
            }
        }
    }
    Some(ov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(nx: usize, ny: usize) -> HyperMesh {
        HyperMesh::new(&Grid::new_2d(nx, ny, nx as f64, ny as f64).unwrap(), 1).unwrap()
    }

    #[test]
    fn point_load_single_entry() {
        let m = mesh(4, 2);
        let lc = LoadCase {
            point_loads: vec![PointLoad { point: [4.0, 1.0, 0.0], direction: 1, magnitude: -1.0 }],
            ..Default::default()
        };
        let f = distribute_load(&lc, &m).unwrap();
        assert_eq!(f.iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(f[m.coarse().node_index(4, 1, 0) * 2 + 1], -1.0);
    }

    #[test]
    fn off_node_point_load_rejected() {
        let m = mesh(4, 2);
        let lc = LoadCase {
            point_loads: vec![PointLoad { point: [3.5, 1.0, 0.0], direction: 1, magnitude: 1.0 }],
            ..Default::default()
        };
        assert!(matches!(distribute_load(&lc, &m), Err(Error::InvalidLoad(_))));
    }

    #[test]
    fn uniform_traction_balances() {
        let m = mesh(5, 2);
        let region = Aabb { lo: [0.0, 2.0, 0.0], hi: [5.0, 2.0, 0.0] };
        let lc = LoadCase { tractions: vec![Traction { region, direction: 1, density: 0.2 }], ..Default::default() };
        let f = distribute_load(&lc, &m).unwrap();
        let total: f64 = f.iter().skip(1).step_by(2).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let g = m.coarse();
        assert!((f[g.node_index(0, 2, 0) * 2 + 1] - 0.1).abs() < 1e-15);
        assert!((f[g.node_index(2, 2, 0) * 2 + 1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn interior_traction_rejected() {
        let m = mesh(4, 4);
        let region = Aabb { lo: [0.0, 2.0, 0.0], hi: [4.0, 2.0, 0.0] };
        let lc = LoadCase { tractions: vec![Traction { region, direction: 1, density: 1.0 }], ..Default::default() };
        assert!(distribute_load(&lc, &m).is_err());
    }
}
