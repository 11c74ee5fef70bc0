//! Ersatz-material finite element analysis on the hyper-element mesh.

mod assembly;
mod element;
mod loads;
mod solve;

pub use assembly::{assemble, assemble_into, element_dofs, stiffness_pattern, DofMap};
pub use element::{b_matrix, hyper_element_stiffness, IntegrationRule, shape_gradients_natural, strain_components, LocalStiffness};
pub use loads::{constrained_dofs, distribute_load, node_overrides, LoadCase, PointLoad, Region, Support, Traction};
pub use solve::{FeSystem, FeaSolution, SolveMethod, SolverKind, SolverSettings};

use crate::error::{Error, Result};
use crate::geometry::{RegularizationParams, TdfField};
use crate::mesh::{Grid, HyperMesh};

/// Isotropic linear elastic solid and the ersatz penalization exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub e_s: f64,
    pub nu: f64,
    pub q_penal: f64,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        Self { e_s: 1.0, nu: 0.3, q_penal: 2.0 }
    }
}

impl MaterialSpec {
    pub fn new(e_s: f64, nu: f64, q_penal: f64) -> Result<Self> {
        let m = Self { e_s, nu, q_penal };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_s > 0.0 && self.e_s.is_finite()) {
            return Err(Error::InvalidLoad(format!("Young's modulus must be positive, got {}", self.e_s)));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::InvalidLoad(format!("Poisson ratio must lie in (-1, 0.5), got {}", self.nu)));
        }
        if !(self.q_penal >= 1.0) {
            return Err(Error::InvalidLoad(format!("penalization exponent must be >= 1, got {}", self.q_penal)));
        }
        Ok(())
    }

    /// Unit-modulus constitutive matrix, row-major: plane stress in 2D,
    /// isotropic in 3D (engineering shear strains).
    pub fn unit_constitutive(&self, dim: usize) -> Vec<f64> {
        let nu = self.nu;
        if dim == 2 {
            let f = 1.0 / (1.0 - nu * nu);
            vec![f, f * nu, 0.0, f * nu, f, 0.0, 0.0, 0.0, f * (1.0 - nu) / 2.0]
        } else {
            let f = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let mut d = vec![0.0; 36];
            for i in 0..3 {
                for j in 0..3 {
                    d[i * 6 + j] = f * if i == j { 1.0 - nu } else { nu };
                }
                d[(i + 3) * 6 + i + 3] = f * (1.0 - 2.0 * nu) / 2.0;
            }
            d
        }
    }
}

/// Smeared modulus of one background cell from the structure TDF at its
/// corners: `E_s * mean(H(phi)^q)`.
pub fn smeared_modulus(corner_tdf: &[f64], material: &MaterialSpec, reg: &RegularizationParams) -> f64 {
    let sum: f64 = corner_tdf.iter().map(|&v| reg.heaviside(v).powf(material.q_penal)).sum();
    material.e_s * sum / corner_tdf.len() as f64
}

/// Smeared modulus of every background cell given nodal Heaviside values.
pub fn cell_moduli(nodal_h: &[f64], grid: &Grid, material: &MaterialSpec) -> Vec<f64> {
    let hq: Vec<f64> = nodal_h.iter().map(|&h| powq(h, material.q_penal)).collect();
    let nc = grid.corners_per_cell();
    let scale = material.e_s / nc as f64;
    (0..grid.num_cells())
        .map(|c| {
            let [i, j, k] = grid.cell_ijk(c);
            let corners = grid.cell_corners(i, j, k);
            scale * corners[..nc].iter().map(|&n| hq[n]).sum::<f64>()
        })
        .collect()
}

#[inline]
pub(crate) fn powq(h: f64, q: f64) -> f64 {
    if q == 2.0 {
        h * h
    } else {
        h.powf(q)
    }
}

/// Material volume (area in 2D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeReport {
    /// Cell-averaged nodal Heaviside integrated over the grid; includes the
    /// `alpha_min` floor of void regions.
    pub raw: f64,
    /// `(raw - alpha_min * V_D) / (1 - alpha_min)`, the volume with the
    /// ersatz floor removed.
    pub floor_corrected: f64,
}

pub fn volume(field: &TdfField, grid: &Grid, reg: &RegularizationParams) -> VolumeReport {
    let raw = volume_from_heaviside(&field.heaviside(reg), grid);
    let vd = grid.domain_measure();
    VolumeReport { raw, floor_corrected: (raw - reg.alpha_min * vd) / (1.0 - reg.alpha_min) }
}

pub(crate) fn volume_from_heaviside(nodal_h: &[f64], grid: &Grid) -> f64 {
    let w = grid.cell_measure() / grid.corners_per_cell() as f64;
    nodal_h.iter().enumerate().map(|(n, &h)| h * grid.cells_at_node(n) as f64).sum::<f64>() * w
}

/// Compliance of a fixed design recomputed on a coarser or finer mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reanalysis {
    pub ratio: usize,
    pub compliance: f64,
}

/// Re-solves the design given by `cell_moduli` with hyper-element ratio
/// `ratio` on the same background grid (ratio 1 is the full-resolution
/// analysis).
pub fn reanalyze_at_ratio(
    cell_moduli: &[f64],
    grid: &Grid,
    ratio: usize,
    material: &MaterialSpec,
    load: &LoadCase,
    settings: SolverSettings,
) -> Result<Reanalysis> {
    let mesh = HyperMesh::new(grid, ratio)?;
    let forces = distribute_load(load, &mesh)?;
    let fixed = constrained_dofs(load, &mesh)?;
    let mut sys = FeSystem::new(mesh, material, &fixed, settings)?;
    sys.assemble(cell_moduli);
    let sol = sys.solve(&forces)?;
    Ok(Reanalysis { ratio, compliance: sol.compliance })
}

/// Full-resolution compliance `c_post` of a final design and the relative
/// error `|c_post - c_obj| / c_post` of the coarse analysis.
pub fn reanalyze_on_background(
    cell_moduli: &[f64],
    grid: &Grid,
    material: &MaterialSpec,
    load: &LoadCase,
    settings: SolverSettings,
    c_obj: f64,
) -> Result<(f64, f64)> {
    let c_post = reanalyze_at_ratio(cell_moduli, grid, 1, material, load, settings)?.compliance;
    Ok((c_post, relative_error(c_obj, c_post)))
}

pub fn relative_error(c_obj: f64, c_post: f64) -> f64 {
    if c_post == 0.0 {
        0.0
    } else {
        (c_post - c_obj).abs() / c_post
    }
}
