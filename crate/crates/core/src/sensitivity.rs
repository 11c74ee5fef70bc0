//! Analytic design sensitivities of compliance and volume.
//!
//! Both gradients are non-zero only through nodes in the transition band
//! `|phi| <= epsilon`, where the regularized Heaviside has a non-zero slope;
//! the chain rule then runs through the stored K-S weights into each
//! contributing component's TDF partials.

use crate::error::{Error, Result};
use crate::fea::{element_dofs, powq, FeSystem, FeaSolution, MaterialSpec};
use crate::geometry::{design_fingerprint, support_box, Component, RegularizationParams, TdfField};
use crate::mesh::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    /// Compliance gradient, component-major over the flat design vector.
    pub d_compliance: Vec<f64>,
    pub d_volume: Vec<f64>,
    /// Size of the transition band.
    pub band_nodes: usize,
    /// Components whose support box misses the grid entirely.
    pub inactive_components: usize,
}

/// Unit-modulus strain energy `(B u)^T D0 (B u) A_g` of every background cell.
pub fn cell_energies(system: &FeSystem, displacements: &[f64]) -> Vec<f64> {
    let mesh = system.mesh();
    let local = system.local();
    let nd = local.dofs();
    let mut out = vec![0.0; mesh.background().num_cells()];
    let mut edofs = [0usize; 24];
    let mut ue = [0.0; 24];
    for e in 0..mesh.num_elements() {
        element_dofs(mesh, e, &mut edofs[..nd]);
        for a in 0..nd {
            ue[a] = displacements[edofs[a]];
        }
        for (j, c) in mesh.owned_cells(e).into_iter().enumerate() {
            out[c] = local.point_energy(j, &ue[..nd]);
        }
    }
    out
}

fn check_current<C: Component>(components: &[C], field: &TdfField, solution: Option<&FeaSolution>) -> Result<()> {
    let h = design_fingerprint(components);
    if field.design_hash() != h {
        return Err(Error::StaleSolution);
    }
    if let Some(sol) = solution {
        if sol.design_hash != Some(h) {
            return Err(Error::StaleSolution);
        }
    }
    Ok(())
}

/// Sum of `values` over the background cells sharing node `n`.
fn adjacent_cell_sum(grid: &Grid, n: usize, values: &[f64]) -> f64 {
    let ijk = grid.node_ijk(n);
    let cells = grid.cells();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for d in 0..3 {
        if d < grid.dim() {
            lo[d] = ijk[d].saturating_sub(1);
            hi[d] = ijk[d].min(cells[d] - 1);
        }
    }
    let mut acc = 0.0;
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                acc += values[grid.cell_index(i, j, k)];
            }
        }
    }
    acc
}

/// Chains per-node derivatives `d(.)/d(phi_n)` through the K-S weights and
/// component partials of every band node. `node_derivs[b]` belongs to the
/// `b`-th band node and holds one value per output gradient.
fn chain_to_parameters<C: Component, const K: usize>(
    components: &[C],
    field: &TdfField,
    grid: &Grid,
    p_exp: i32,
    node_derivs: &[[f64; K]],
) -> [Vec<f64>; K] {
    let np = C::NUM_PARAMS;
    let mut out: [Vec<f64>; K] = std::array::from_fn(|_| vec![0.0; components.len() * np]);
    let mut partials = vec![0.0; np];
    for (b, &n) in field.band_nodes().iter().enumerate() {
        let g = node_derivs[b];
        if g.iter().all(|v| *v == 0.0) {
            continue;
        }
        let x = grid.node_coords(n);
        for &(id, w) in field.band_contributors(b) {
            if w == 0.0 {
                continue;
            }
            let id = id as usize;
            components[id].tdf_with_partials(&x, p_exp, &mut partials);
            for (o, gk) in out.iter_mut().zip(g) {
                let dst = &mut o[id * np..(id + 1) * np];
                for (d, p) in dst.iter_mut().zip(&partials) {
                    *d += gk * w * p;
                }
            }
        }
    }
    out
}

fn compliance_node_derivs(
    field: &TdfField,
    grid: &Grid,
    energies: &[f64],
    material: &MaterialSpec,
    reg: &RegularizationParams,
) -> Vec<f64> {
    let q = material.q_penal;
    let scale = -material.e_s * q / grid.corners_per_cell() as f64;
    field
        .band_nodes()
        .iter()
        .map(|&n| {
            let phi = field.value(n);
            let h = reg.heaviside(phi);
            let dh = reg.heaviside_deriv(phi);
            if dh == 0.0 {
                return 0.0;
            }
            scale * powq(h, q - 1.0) * dh * adjacent_cell_sum(grid, n, energies)
        })
        .collect()
}

fn volume_node_derivs(field: &TdfField, grid: &Grid, reg: &RegularizationParams) -> Vec<f64> {
    let w = grid.cell_measure() / grid.corners_per_cell() as f64;
    field
        .band_nodes()
        .iter()
        .map(|&n| w * reg.heaviside_deriv(field.value(n)) * grid.cells_at_node(n) as f64)
        .collect()
}

/// `dC/dd` for every design variable.
pub fn compliance_gradient<C: Component>(
    components: &[C],
    field: &TdfField,
    solution: &FeaSolution,
    system: &FeSystem,
    material: &MaterialSpec,
    reg: &RegularizationParams,
) -> Result<Vec<f64>> {
    check_current(components, field, Some(solution))?;
    let grid = system.mesh().background();
    let energies = cell_energies(system, &solution.displacements);
    let nd: Vec<[f64; 1]> = compliance_node_derivs(field, grid, &energies, material, reg).into_iter().map(|v| [v]).collect();
    let [g] = chain_to_parameters(components, field, grid, reg.p_exp, &nd);
    Ok(g)
}

/// `dV/dd` for every design variable, consistent with [`crate::fea::volume`].
pub fn volume_gradient<C: Component>(
    components: &[C],
    field: &TdfField,
    grid: &Grid,
    reg: &RegularizationParams,
) -> Result<Vec<f64>> {
    check_current(components, field, None)?;
    let nd: Vec<[f64; 1]> = volume_node_derivs(field, grid, reg).into_iter().map(|v| [v]).collect();
    let [g] = chain_to_parameters(components, field, grid, reg.p_exp, &nd);
    Ok(g)
}

/// Both gradients in one pass over the band.
pub fn sensitivities<C: Component>(
    components: &[C],
    field: &TdfField,
    solution: &FeaSolution,
    system: &FeSystem,
    material: &MaterialSpec,
    reg: &RegularizationParams,
) -> Result<SensitivityResult> {
    check_current(components, field, Some(solution))?;
    let grid = system.mesh().background();
    let energies = cell_energies(system, &solution.displacements);
    let dc = compliance_node_derivs(field, grid, &energies, material, reg);
    let dv = volume_node_derivs(field, grid, reg);
    let nd: Vec<[f64; 2]> = dc.into_iter().zip(dv).map(|(a, b)| [a, b]).collect();
    let [d_compliance, d_volume] = chain_to_parameters(components, field, grid, reg.p_exp, &nd);
    let inactive_components =
        components.iter().filter(|c| support_box(*c, grid, reg.epsilon, reg.p_exp).is_empty()).count();
    Ok(SensitivityResult { d_compliance, d_volume, band_nodes: field.band_nodes().len(), inactive_components })
}
