//! Linear solves of the constrained stiffness system.

use std::sync::Arc;

use super::assembly::{assemble_into, stiffness_pattern, DofMap};
use super::element::{IntegrationRule, LocalStiffness};
use super::MaterialSpec;
use crate::error::{Error, Result};
use crate::linalg::{grid_nested_dissection, pcg_jacobi, CholeskyFactor, CsrMatrix, SymbolicCholesky};
use crate::mesh::HyperMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Direct factorization unless its estimated memory exceeds the budget.
    Auto,
    Direct,
    Pcg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub kind: SolverKind,
    /// Relative residual target.
    pub tolerance: f64,
    pub max_pcg_iterations: usize,
    /// Upper bound on factor storage for [`SolverKind::Auto`].
    pub memory_budget_bytes: usize,
    pub integration: IntegrationRule,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { kind: SolverKind::Auto, tolerance: 1e-8, max_pcg_iterations: 200_000, memory_budget_bytes: 3 << 30, integration: IntegrationRule::Standard }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Direct,
    Pcg,
}

/// Displacements over all hyper-mesh dofs (zero at constrained dofs) and
/// the resulting compliance.
#[derive(Debug, Clone)]
pub struct FeaSolution {
    pub displacements: Vec<f64>,
    pub compliance: f64,
    pub method: SolveMethod,
    /// PCG iterations, or refinement steps for the direct path.
    pub iterations: usize,
    pub relative_residual: f64,
    /// Fingerprint of the design that produced the system, when known.
    pub design_hash: Option<u64>,
}

/// Mesh, constraints and cached symbolic data for repeated solves on one mesh.
#[derive(Debug, Clone)]
pub struct FeSystem {
    mesh: HyperMesh,
    local: LocalStiffness,
    dofs: DofMap,
    matrix: CsrMatrix,
    symbolic: Option<Arc<SymbolicCholesky>>,
    settings: SolverSettings,
}

impl FeSystem {
    pub fn new(mesh: HyperMesh, material: &MaterialSpec, fixed: &[bool], settings: SolverSettings) -> Result<Self> {
        if fixed.len() != mesh.num_dofs() {
            return Err(Error::Dimension(format!("{} constraint flags for {} dofs", fixed.len(), mesh.num_dofs())));
        }
        let local = LocalStiffness::with_rule(&mesh, material, settings.integration);
        let dofs = DofMap::new(fixed);
        let matrix = stiffness_pattern(&mesh, &dofs);
        Ok(Self { mesh, local, dofs, matrix, symbolic: None, settings })
    }

    pub fn mesh(&self) -> &HyperMesh {
        &self.mesh
    }

    pub fn local(&self) -> &LocalStiffness {
        &self.local
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Assembles the reduced stiffness for the given cell moduli.
    pub fn assemble(&mut self, cell_moduli: &[f64]) -> &CsrMatrix {
        assemble_into(&self.mesh, &self.local, cell_moduli, &self.dofs, &mut self.matrix);
        &self.matrix
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Dissection-ordered symbolic factorization of the reduced pattern.
    pub fn symbolic(&mut self) -> Result<Arc<SymbolicCholesky>> {
        if let Some(s) = &self.symbolic {
            return Ok(s.clone());
        }
        let g = self.mesh.coarse();
        let dim = g.dim();
        let leaf = if dim == 3 { 8 } else { 16 };
        let tree = grid_nested_dissection(g.node_dims(), leaf);
        let supernodes: Vec<Vec<usize>> = tree
            .iter()
            .map(|t| {
                t.nodes
                    .iter().flat_map(|&n| (0..dim).map(move |c| n * dim + c))
                    .filter_map(|d| self.dofs.reduced(d))
                    .collect()
            })
            .collect();
        let children: Vec<Vec<usize>> = tree.iter().map(|t| t.children.clone()).collect();
        let sym = Arc::new(SymbolicCholesky::analyze(&self.matrix, &supernodes, &children)?);
        self.symbolic = Some(sym.clone());
        Ok(sym)
    }

    /// Solves the most recently assembled system for the full-length load
    /// vector `forces` (entries at constrained dofs are ignored).
    pub fn solve(&mut self, forces: &[f64]) -> Result<FeaSolution> {
        if forces.len() != self.mesh.num_dofs() {
            return Err(Error::Dimension(format!("{} forces for {} dofs", forces.len(), self.mesh.num_dofs())));
        }
        let b = self.dofs.restrict(forces);
        let use_direct = match self.settings.kind {
            SolverKind::Direct => true,
            SolverKind::Pcg => false,
            SolverKind::Auto => {
                let sym = self.symbolic()?;
                sym.factor_entries() * 8 <= self.settings.memory_budget_bytes
            }
        };
        let (x, method, iterations, residual) = if b.iter().all(|v| *v == 0.0) {
            (vec![0.0; b.len()], if use_direct { SolveMethod::Direct } else { SolveMethod::Pcg }, 0, 0.0)
        } else if use_direct {
            let sym = self.symbolic()?;
            let factor = CholeskyFactor::factor(sym, &self.matrix)?;
            let mut x = factor.solve(&b);
            // Refinement against an extended-precision residual makes the
            // displacements accurate to working precision despite the
            // stiffness contrast of the ersatz material.
            let xn = norm(&x);
            let mut steps = 0;
            while steps < 3 {
                let r = self.matrix.residual_compensated(&x, &b);
                let dx = factor.solve(&r);
                x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
                steps += 1;
                if norm(&dx) <= 1e-15 * xn {
                    break;
                }
            }
            let res = relative_residual(&self.matrix, &x, &b);
            (x, SolveMethod::Direct, steps, res)
        } else {
            let mut x = vec![0.0; b.len()];
            let rep = pcg_jacobi(&self.matrix, &b, &mut x, self.settings.tolerance, self.settings.max_pcg_iterations)?;
            (x, SolveMethod::Pcg, rep.iterations, rep.relative_residual)
        };
        let displacements = self.dofs.expand(&x);
        let compliance = forces.iter().zip(&displacements).map(|(f, u)| f * u).sum();
        Ok(FeaSolution { displacements, compliance, method, iterations, relative_residual: residual, design_hash: None })
    }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    a.matvec(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    r
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r = residual(a, x, b);
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    r.iter().map(|v| v * v).sum::<f64>().sqrt() / bn
}
