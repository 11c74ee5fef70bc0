//! Global stiffness assembly over the hyper-element mesh.

use super::element::LocalStiffness;
use crate::linalg::CsrMatrix;
use crate::mesh::HyperMesh;

const NONE: usize = usize::MAX;

/// Numbering of unconstrained dofs; constrained dofs are eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    reduced: Vec<usize>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn new(fixed: &[bool]) -> Self {
        let mut reduced = vec![NONE; fixed.len()];
        let mut free = Vec::new();
        for (d, &f) in fixed.iter().enumerate() {
            if !f {
                reduced[d] = free.len();
                free.push(d);
            }
        }
        Self { reduced, free }
    }

    /// Every dof free.
    pub fn unconstrained(n: usize) -> Self {
        Self::new(&vec![false; n])
    }

    pub fn num_dofs(&self) -> usize {
        self.reduced.len()
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Reduced index of global dof `d`, if free.
    #[inline]
    pub fn reduced(&self, d: usize) -> Option<usize> {
        let r = self.reduced[d];
        (r != NONE).then_some(r)
    }

    /// Global dof of each reduced index.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.reduced.len()];
        for (r, &d) in self.free.iter().enumerate() {
            full[d] = reduced[r];
        }
        full
    }
}

/// Sparsity pattern of the reduced stiffness matrix: each free dof couples
/// with every free dof of the nodes sharing a hyper-element with it.
pub fn stiffness_pattern(mesh: &HyperMesh, dofs: &DofMap) -> CsrMatrix {
    let g = mesh.coarse();
    let dim = g.dim();
    let nd = g.node_dims();
    let mut row_ptr = Vec::with_capacity(dofs.num_free() + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let range = |i: usize, n: usize| i.saturating_sub(1)..(i + 2).min(n);
    for &d in dofs.free_dofs() {
        let [i, j, k] = g.node_ijk(d / dim);
        for kk in range(k, nd[2]) {
            for jj in range(j, nd[1]) {
                for ii in range(i, nd[0]) {
                    let node = g.node_index(ii, jj, kk);
                    for c in 0..dim {
                        if let Some(r) = dofs.reduced(node * dim + c) {
                            cols.push(r);
                        }
                    }
                }
            }
        }
        row_ptr.push(cols.len());
    }
    CsrMatrix::from_pattern(dofs.num_free(), row_ptr, cols)
}

/// Global dofs of hyper-element `e`, corner-major.
pub fn element_dofs(mesh: &HyperMesh, e: usize, out: &mut [usize]) {
    let g = mesh.coarse();
    let dim = g.dim();
    let [i, j, k] = g.cell_ijk(e);
    let corners = g.cell_corners(i, j, k);
    for (c, &n) in corners[..g.corners_per_cell()].iter().enumerate() {
        for d in 0..dim {
            out[c * dim + d] = n * dim + d;
        }
    }
}

const CHUNK: usize = 2048;

/// Assembles the reduced global stiffness for the given background-cell
/// moduli into a copy of `pattern`. Element matrices are formed in parallel
/// and scattered in element order, so the result does not depend on the
/// thread count.
pub fn assemble_into(
    mesh: &HyperMesh,
    local: &LocalStiffness,
    cell_moduli: &[f64],
    dofs: &DofMap,
    matrix: &mut CsrMatrix,
) {
    use rayon::prelude::*;
    matrix.fill_zero();
    let nd = local.dofs();
    let ne = mesh.num_elements();
    let ng = mesh.points_per_element();
    let mut buf = vec![0.0; CHUNK.min(ne) * nd * nd];
    let mut start = 0;
    while start < ne {
        let end = (start + CHUNK).min(ne);
        buf[..(end - start) * nd * nd].par_chunks_mut(nd * nd).enumerate().for_each(|(o, k)| {
            let e = start + o;
            let moduli: Vec<f64> = mesh.owned_cells(e).into_iter().map(|c| cell_moduli[c]).collect();
            debug_assert_eq!(moduli.len(), ng);
            local.element_matrix(&moduli, k);
        });
        let mut edofs = [0usize; 24];
        let mut red = [NONE; 24];
        for e in start..end {
            element_dofs(mesh, e, &mut edofs[..nd]);
            for a in 0..nd {
                red[a] = dofs.reduced(edofs[a]).unwrap_or(NONE);
            }
            let k = &buf[(e - start) * nd * nd..(e - start + 1) * nd * nd];
            for a in 0..nd {
                if red[a] == NONE {
                    continue;
                }
                for b in 0..nd {
                    if red[b] != NONE {
                        matrix.add(red[a], red[b], k[a * nd + b]);
                    }
                }
            }
        }
        start = end;
    }
}

/// Assembled reduced stiffness as a fresh matrix.
pub fn assemble(mesh: &HyperMesh, local: &LocalStiffness, cell_moduli: &[f64], dofs: &DofMap) -> CsrMatrix {
    let mut m = stiffness_pattern(mesh, dofs);
    assemble_into(mesh, local, cell_moduli, dofs, &mut m);
    m
}
