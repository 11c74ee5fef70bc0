//! Benchmark problem definitions.

use crate::error::{Error, Result};
use crate::fea::{LoadCase, PointLoad, Region, Support, Traction};
use crate::mesh::{Aabb, Grid, HyperMesh, SubregionGrid};

use super::layout::LayoutRecipe;

/// How the modelled domain relates to the full structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// Half model with a mirror plane.
    Half,
    /// One octant with three (anti)symmetry planes.
    Eighth,
}

/// Everything that defines one optimization problem apart from algorithm
/// settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub name: String,
    pub dim: usize,
    /// Extent of the modelled domain `[0, lengths]`.
    pub lengths: [f64; 3],
    /// Background cells per direction.
    pub background: [usize; 3],
    /// Background cells per hyper-element edge.
    pub ratio: usize,
    /// Sub-regions per direction confining component centers.
    pub partition: [usize; 3],
    /// Admissible material volume as a fraction of the modelled domain.
    pub volume_fraction: f64,
    pub load: LoadCase,
    pub layout: LayoutRecipe,
    pub symmetry: Symmetry,
}

impl ProblemDef {
    pub fn validate(&self) -> Result<()> {
        if !(self.volume_fraction > 0.0 && self.volume_fraction < 1.0) {
            return Err(Error::Config {
                path: "volume_fraction".into(),
                message: format!("must lie in (0, 1), got {}", self.volume_fraction),
            });
        }
        let grid = self.grid()?;
        HyperMesh::new(&grid, self.ratio)?;
        self.subregions()?;
        if self.layout.per_cell == 0 || self.layout.cells[..self.dim].iter().any(|&c| c == 0) {
            return Err(Error::Config { path: "layout".into(), message: "layout must place at least one component".into() });
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.background, self.lengths)
    }

    pub fn mesh(&self) -> Result<HyperMesh> {
        HyperMesh::new(&self.grid()?, self.ratio)
    }

    pub fn subregions(&self) -> Result<SubregionGrid> {
        SubregionGrid::new(self.dim, self.partition, self.lengths)
    }

    pub fn domain_measure(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    /// Admissible material volume `V_bar`.
    pub fn volume_limit(&self) -> f64 {
        self.volume_fraction * self.domain_measure()
    }
}

fn edge(lo: [f64; 3], hi: [f64; 3]) -> Aabb {
    Aabb { lo, hi }
}

/// 2D layout used by all planar benchmarks: 16 x 9 cells of two crossed pairs.
pub fn planar_layout() -> LayoutRecipe {
    LayoutRecipe { cells: [16, 9, 1], per_cell: 4, length_fraction: 1.3, thickness: None }
}

/// 12 x 6 cantilever clamped on the left edge with a unit downward force at
/// the middle of the right edge.
pub fn cantilever(background: [usize; 2], ratio: usize, partition: [usize; 2]) -> ProblemDef {
    let (lx, ly) = (12.0, 6.0);
    let load = LoadCase {
        point_loads: vec![PointLoad { point: [lx, ly / 2.0, 0.0], direction: 1, magnitude: -1.0 }],
        supports: vec![Support { region: edge([0.0, 0.0, 0.0], [0.0, ly, 0.0]), components: vec![0, 1] }],
        ..LoadCase::default()
    };
    ProblemDef {
        name: "cantilever".into(),
        dim: 2,
        lengths: [lx, ly, 1.0],
        background: [background[0], background[1], 1],
        ratio,
        partition: [partition[0], partition[1], 1],
        volume_fraction: 0.4,
        load,
        layout: planar_layout(),
        symmetry: Symmetry::None,
    }
}

/// Right half of a 24 x 6 simply supported beam with a force of 2 at the
/// top middle. The modelled half carries a force of 1 at `(0, 6)`, slides
/// vertically on the symmetry line `x = 0` and rests on a roller at the
/// bottom-right corner.
pub fn mbb(background: [usize; 2], ratio: usize, partition: [usize; 2]) -> ProblemDef {
    let (lx, ly) = (12.0, 6.0);
    let load = LoadCase {
        point_loads: vec![PointLoad { point: [0.0, ly, 0.0], direction: 1, magnitude: -1.0 }],
        supports: vec![
            Support { region: edge([0.0, 0.0, 0.0], [0.0, ly, 0.0]), components: vec![0] },
            Support { region: edge([lx, 0.0, 0.0], [lx, 0.0, 0.0]), components: vec![1] },
        ],
        ..LoadCase::default()
    };
    ProblemDef {
        name: "mbb".into(),
        dim: 2,
        lengths: [lx, ly, 1.0],
        background: [background[0], background[1], 1],
        ratio,
        partition: [partition[0], partition[1], 1],
        volume_fraction: 0.4,
        load,
        layout: LayoutRecipe { length_fraction: 1.6, ..planar_layout() },
        symmetry: Symmetry::Half,
    }
}

/// 12 x 6 cantilever clamped on the left edge carrying a uniform downward
/// load of total magnitude 1 on its top edge. `solid_layers` rows of
/// background cells along the top edge are fixed solid.
pub fn distributed_load(
    background: [usize; 2],
    ratio: usize,
    partition: [usize; 2],
    solid_layers: usize,
    volume_fraction: f64,
) -> ProblemDef {
    let (lx, ly) = (12.0, 6.0);
    let h = ly / background[1] as f64;
    let mut load = LoadCase {
        tractions: vec![Traction { region: edge([0.0, ly, 0.0], [lx, ly, 0.0]), direction: 1, density: -1.0 / lx }],
        supports: vec![Support { region: edge([0.0, 0.0, 0.0], [0.0, ly, 0.0]), components: vec![0, 1] }],
        ..LoadCase::default()
    };
    if solid_layers > 0 {
        let lo = ly - solid_layers as f64 * h;
        load.fixed_solid.push(Region::Box(edge([0.0, lo, 0.0], [lx, ly, 0.0])));
    }
    ProblemDef {
        name: "distributed".into(),
        dim: 2,
        lengths: [lx, ly, 1.0],
        background: [background[0], background[1], 1],
        ratio,
        partition: [partition[0], partition[1], 1],
        volume_fraction,
        load,
        layout: planar_layout(),
        symmetry: Symmetry::None,
    }
}

/// Radius of the loaded disks of the torsion box.
pub const DISK_RADIUS: f64 = 1.5;
/// Thickness of the loaded disks of the torsion box.
pub const DISK_THICKNESS: f64 = 0.15;
/// Radius of the non-design void cylinders behind the disks.
pub const VOID_RADIUS: f64 = 1.0;

/// One octant `[0,6] x [0,5] x [0,6]` of a 12 x 10 x 12 box twisted about
/// the y axis by two opposite torques. Each torque is applied through solid
/// disks (radius 1.5, thickness 0.15) on the y faces; a void cylinder of
/// radius 1 runs along the axis between the disk and the center plane.
///
/// The loading is antisymmetric about all three coordinate planes, so each
/// plane constrains its in-plane displacement components. The octant carries
/// one tangential rim force of magnitude 1 (half of the force of 2 that sits
/// on the `z = 0` plane).
pub fn torsion_box(background: [usize; 3], ratio: usize, partition: [usize; 3], volume_fraction: f64) -> ProblemDef {
    let l = [6.0, 5.0, 6.0];
    let y_disk = l[1] - DISK_THICKNESS;
    let load = LoadCase {
        point_loads: vec![PointLoad { point: [DISK_RADIUS, l[1], 0.0], direction: 2, magnitude: -1.0 }],
        supports: vec![
            Support { region: edge([0.0, 0.0, 0.0], [0.0, l[1], l[2]]), components: vec![1, 2] },
            Support { region: edge([0.0, 0.0, 0.0], [l[0], 0.0, l[2]]), components: vec![0, 2] },
            Support { region: edge([0.0, 0.0, 0.0], [l[0], l[1], 0.0]), components: vec![0, 1] },
        ],
        fixed_solid: vec![Region::Cylinder {
            axis: 1,
            center: [0.0, 0.0, 0.0],
            radius: DISK_RADIUS,
            lo: y_disk,
            hi: l[1],
        }],
        fixed_void: vec![Region::Cylinder { axis: 1, center: [0.0, 0.0, 0.0], radius: VOID_RADIUS, lo: 0.0, hi: y_disk }],
        ..LoadCase::default()
    };
    ProblemDef {
        name: "box".into(),
        dim: 3,
        lengths: l,
        background,
        ratio,
        partition,
        volume_fraction,
        load,
        layout: LayoutRecipe { cells: [6, 5, 6], per_cell: 4, length_fraction: 1.3, thickness: None },
        symmetry: Symmetry::Eighth,
    }
}

/// Named problem at its full published resolution.
pub fn builtin(name: &str) -> Result<ProblemDef> {
    match name {
        "cantilever" => Ok(cantilever([1280, 640], 8, [12, 6])),
        "mbb" => Ok(mbb([1280, 640], 5, [12, 6])),
        "distributed" => Ok(distributed_load([1200, 600], 1, [6, 3], 1, 0.4)),
        "box" => Ok(torsion_box([42, 35, 42], 1, [6, 5, 6], 0.02)),
        _ => Err(Error::Config { path: "problem.name".into(), message: format!("unknown problem `{name}`") }),
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["cantilever", "mbb", "distributed", "box"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fea::{constrained_dofs, distribute_load, node_overrides};
    use crate::geometry::NodeOverride;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap().validate().unwrap();
        }
        assert!(builtin("bridge").is_err());
    }

    #[test]
    fn volume_fraction_checked() {
        let mut p = cantilever([32, 16], 1, [1, 1]);
        p.volume_fraction = 1.5;
        assert!(p.validate().is_err());
        p.volume_fraction = 0.4;
        assert!((p.volume_limit() - 28.8).abs() < 1e-12);
    }

    #[test]
    fn mbb_loads_resolve() {
        let p = mbb([64, 32], 2, [12, 6]);
        let mesh = p.mesh().unwrap();
        let f = distribute_load(&p.load, &mesh).unwrap();
        assert_eq!(f.iter().sum::<f64>(), -1.0);
        let fixed = constrained_dofs(&p.load, &mesh).unwrap();
        assert_eq!(fixed.iter().filter(|&&b| b).count(), 17 + 1);
    }

    #[test]
    fn distributed_total_force_and_layer() {
        let p = distributed_load([48, 24], 4, [6, 3], 1, 0.3);
        let mesh = p.mesh().unwrap();
        let f = distribute_load(&p.load, &mesh).unwrap();
        assert!((f.iter().sum::<f64>() + 1.0).abs() < 1e-12);
        let grid = p.grid().unwrap();
        let ov = node_overrides(&p.load, &grid).unwrap();
        let solid = ov.iter().filter(|&&o| o == NodeOverride::Solid).count();
        assert_eq!(solid, 2 * 49);
    }

    #[test]
    fn box_regions() {
        let p = torsion_box([24, 20, 24], 2, [2, 2, 2], 0.1);
        let grid = p.grid().unwrap();
        let ov = node_overrides(&p.load, &grid).unwrap();
        assert!(ov.iter().any(|&o| o == NodeOverride::Solid));
        assert!(ov.iter().any(|&o| o == NodeOverride::Void));
        let mesh = p.mesh().unwrap();
        let f = distribute_load(&p.load, &mesh).unwrap();
        assert_eq!(f.iter().sum::<f64>(), -1.0);
    }
}
