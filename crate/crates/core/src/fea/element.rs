//! Bilinear quadrilateral and trilinear brick kinematics, and hyper-element
//! stiffness integrated at background-cell centers.

use crate::mesh::{HyperMesh, CORNER_OFFSETS};

use super::MaterialSpec;

/// Number of strain components: 3 in 2D (xx, yy, xy), 6 in 3D
/// (xx, yy, zz, xy, yz, zx) with engineering shear strains.
pub fn strain_components(dim: usize) -> usize {
    if dim == 3 {
        6
    } else {
        3
    }
}

/// Derivatives of the corner shape functions with respect to the natural
/// coordinates at `xi`, in [`CORNER_OFFSETS`] order.
pub fn shape_gradients_natural(dim: usize, xi: [f64; 3]) -> Vec<[f64; 3]> {
    let corners = 1 << dim;
    let scale = 1.0 / corners as f64;
    CORNER_OFFSETS[..corners]
        .iter()
        .map(|off| {
            let s = [2.0 * off[0] as f64 - 1.0, 2.0 * off[1] as f64 - 1.0, 2.0 * off[2] as f64 - 1.0];
            let f: Vec<f64> = (0..dim).map(|d| 1.0 + s[d] * xi[d]).collect();
            let mut g = [0.0; 3];
            for d in 0..dim {
                let others: f64 = (0..dim).filter(|&o| o != d).map(|o| f[o]).product();
                g[d] = scale * s[d] * others;
            }
            g
        })
        .collect()
}

/// Strain-displacement matrix (row-major, `strain_components x dofs`) for an
/// axis-aligned element with edge lengths `size`, at natural point `xi`.
/// Element dofs are ordered corner-major.
pub fn b_matrix(dim: usize, size: [f64; 3], xi: [f64; 3]) -> Vec<f64> {
    let grads = shape_gradients_natural(dim, xi);
    let nd = grads.len() * dim;
    let ns = strain_components(dim);
    let mut b = vec![0.0; ns * nd];
    for (c, g) in grads.iter().enumerate() {
        let dx: Vec<f64> = (0..dim).map(|d| g[d] * 2.0 / size[d]).collect();
        let col = c * dim;
        if dim == 2 {
            b[col] = dx[0];
            b[nd + col + 1] = dx[1];
            b[2 * nd + col] = dx[1];
            b[2 * nd + col + 1] = dx[0];
        } else {
            b[col] = dx[0];
            b[nd + col + 1] = dx[1];
            b[2 * nd + col + 2] = dx[2];
            b[3 * nd + col] = dx[1];
            b[3 * nd + col + 1] = dx[0];
            b[4 * nd + col + 1] = dx[2];
            b[4 * nd + col + 2] = dx[1];
            b[5 * nd + col] = dx[2];
            b[5 * nd + col + 2] = dx[0];
        }
    }
    b
}

/// `B^T D B * weight`, accumulated into the row-major `nd x nd` matrix `k`.
pub fn add_btdb(b: &[f64], d: &[f64], ns: usize, nd: usize, weight: f64, k: &mut [f64]) {
    let mut db = vec![0.0; ns * nd];
    for i in 0..ns {
        for p in 0..ns {
            let dip = d[i * ns + p];
            if dip == 0.0 {
                continue;
            }
            for c in 0..nd {
                db[i * nd + c] += dip * b[p * nd + c];
            }
        }
    }
    for r in 0..nd {
        for c in 0..nd {
            let mut acc = 0.0;
            for i in 0..ns {
                acc += b[i * nd + r] * db[i * nd + c];
            }
            k[r * nd + c] += weight * acc;
        }
    }
}

/// How the per-cell stiffness contributions are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationRule {
    /// One point at every background-cell center, for every ratio. At
    /// ratio 1 this is the rank-deficient centroid rule.
    CellCenters,
    /// Cell centers for ratios above 1; at ratio 1 each hyper-element is an
    /// ordinary bilinear/trilinear element integrated exactly with the
    /// 2-point Gauss product rule.
    #[default]
    Standard,
}

/// Per-integration-point matrices shared by every hyper-element of a uniform mesh.
#[derive(Debug, Clone)]
pub struct LocalStiffness {
    dim: usize,
    dofs: usize,
    /// Unit-modulus stiffness contribution of each owned background cell (row-major).
    k: Vec<Vec<f64>>,
}

impl LocalStiffness {
    pub fn new(mesh: &HyperMesh, material: &MaterialSpec) -> Self {
        Self::with_rule(mesh, material, IntegrationRule::Standard)
    }

    pub fn with_rule(mesh: &HyperMesh, material: &MaterialSpec, rule: IntegrationRule) -> Self {
        let dim = mesh.dim();
        let dofs = (1 << dim) * dim;
        let strains = strain_components(dim);
        let d0 = material.unit_constitutive(dim);
        let size = mesh.coarse().spacing();
        let cell_measure = mesh.background().cell_measure();
        let gauss = rule == IntegrationRule::Standard && mesh.ratio() == 1;
        let k = if gauss {
            let g = 1.0 / 3f64.sqrt();
            let mut kj = vec![0.0; dofs * dofs];
            let nz = if dim == 3 { 2 } else { 1 };
            let w = cell_measure / (1 << dim) as f64;
            for c in 0..nz {
                for b in 0..2 {
                    for a in 0..2 {
                        let sign = |i: usize| if i == 0 { -g } else { g };
                        let xi = [sign(a), sign(b), if dim == 3 { sign(c) } else { 0.0 }];
                        add_btdb(&b_matrix(dim, size, xi), &d0, strains, dofs, w, &mut kj);
                    }
                }
            }
            symmetrize(&mut kj, dofs);
            vec![kj]
        } else {
            mesh.local_points()
                .into_iter()
                .map(|xi| {
                    let mut kj = vec![0.0; dofs * dofs];
                    add_btdb(&b_matrix(dim, size, xi), &d0, strains, dofs, cell_measure, &mut kj);
                    symmetrize(&mut kj, dofs);
                    kj
                })
                .collect()
        };
        Self { dim, dofs, k }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dofs per hyper-element.
    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn points(&self) -> usize {
        self.k.len()
    }

    pub fn point_stiffness(&self, j: usize) -> &[f64] {
        &self.k[j]
    }

    /// Unit-modulus energy `u^T K_j u` of the cell at point `j`.
    pub fn point_energy(&self, j: usize, u: &[f64]) -> f64 {
        let nd = self.dofs;
        let k = &self.k[j];
        let mut e = 0.0;
        for r in 0..nd {
            let row = &k[r * nd..(r + 1) * nd];
            e += u[r] * row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        }
        e
    }

    /// `sum_j moduli[j] * K_j` into `out` (row-major `dofs x dofs`).
    pub fn element_matrix(&self, moduli: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (kj, &e) in self.k.iter().zip(moduli) {
            if e == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(kj) {
                *o += e * v;
            }
        }
    }
}

fn symmetrize(k: &mut [f64], n: usize) {
    for r in 0..n {
        for c in r + 1..n {
            let v = 0.5 * (k[r * n + c] + k[c * n + r]);
            k[r * n + c] = v;
            k[c * n + r] = v;
        }
    }
}

/// Stiffness of hyper-element `e` given the smeared modulus of every background cell.
pub fn hyper_element_stiffness(mesh: &HyperMesh, local: &LocalStiffness, cell_moduli: &[f64], e: usize) -> Vec<f64> {
    let moduli: Vec<f64> = mesh.owned_cells(e).into_iter().map(|c| cell_moduli[c]).collect();
    let mut k = vec![0.0; local.dofs() * local.dofs()];
    local.element_matrix(&moduli, &mut k);
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;

    #[test]
    fn shape_gradients_sum_to_zero() {
        for dim in [2, 3] {
            let g = shape_gradients_natural(dim, [0.3, -0.2, 0.7]);
            for d in 0..dim {
                assert!(g.iter().map(|v| v[d]).sum::<f64>().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rigid_translation_has_no_strain() {
        for dim in [2, 3] {
            let b = b_matrix(dim, [1.0, 2.0, 0.5], [0.1, 0.4, -0.3]);
            let nd = (1 << dim) * dim;
            let u: Vec<f64> = (0..nd).map(|i| if i % dim == 0 { 1.0 } else { 0.0 }).collect();
            let ns = strain_components(dim);
            for i in 0..ns {
                assert!((0..nd).map(|c| b[i * nd + c] * u[c]).sum::<f64>().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn one_point_element_is_rank_deficient() {
        let g = Grid::new_2d(1, 1, 1.0, 1.0).unwrap();
        let mesh = HyperMesh::new(&g, 1).unwrap();
        let local = LocalStiffness::with_rule(&mesh, &MaterialSpec::default(), IntegrationRule::CellCenters);
        let k = hyper_element_stiffness(&mesh, &local, &[1.0], 0);
        // hourglass mode u = (+1, -1, +1, -1) in x
        let u = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        let ku: Vec<f64> = (0..8).map(|r| (0..8).map(|c| k[r * 8 + c] * u[c]).sum()).collect();
        assert!(ku.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn standard_rule_is_full_rank_at_ratio_one() {
        let g = Grid::new_2d(1, 1, 1.0, 1.0).unwrap();
        let mesh = HyperMesh::new(&g, 1).unwrap();
        let local = LocalStiffness::new(&mesh, &MaterialSpec::default());
        let k = hyper_element_stiffness(&mesh, &local, &[1.0], 0);
        let u = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        let e: f64 = (0..8).map(|r| u[r] * (0..8).map(|c| k[r * 8 + c] * u[c]).sum::<f64>()).sum();
        assert!(e > 0.1);
        assert!((local.point_energy(0, &u) - e).abs() < 1e-14);
    }

    #[test]
    fn element_matrix_scales_with_modulus() {
        let g = Grid::new_3d(2, 2, 2, 1.0, 1.0, 1.0).unwrap();
        let mesh = HyperMesh::new(&g, 2).unwrap();
        let local = LocalStiffness::new(&mesh, &MaterialSpec::default());
        let k1 = hyper_element_stiffness(&mesh, &local, &[1.0; 8], 0);
        let k3 = hyper_element_stiffness(&mesh, &local, &[3.0; 8], 0);
        for (a, b) in k1.iter().zip(&k3) {
            assert!((3.0 * a - b).abs() < 1e-13);
        }
    }
}
