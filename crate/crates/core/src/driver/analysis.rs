//! One pass of the geometry -> analysis -> sensitivity pipeline.

use std::time::Instant;

use crate::error::Result;
use crate::fea::{
    cell_moduli, constrained_dofs, distribute_load, node_overrides, volume, FeSystem, FeaSolution, MaterialSpec,
    SolverSettings, VolumeReport,
};
use crate::geometry::{Component, NodeOverride, RegularizationParams, TdfField};
use crate::mesh::Grid;
use crate::sensitivity::sensitivities;

use super::problem::ProblemDef;

/// Wall-clock seconds spent in each stage of one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub tdf: f64,
    pub fea: f64,
    pub sensitivity: f64,
    pub mma: f64,
    pub total: f64,
}

/// Responses of one design.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub compliance: f64,
    pub volume: VolumeReport,
    /// Present when gradients were requested.
    pub d_compliance: Option<Vec<f64>>,
    pub d_volume: Option<Vec<f64>>,
    pub times: StageTimes,
}

/// Reusable analysis context for one problem: grid, mesh, loads and the
/// factorization pattern.
#[derive(Debug, Clone)]
pub struct Analysis {
    grid: Grid,
    reg: RegularizationParams,
    material: MaterialSpec,
    system: FeSystem,
    forces: Vec<f64>,
    overrides: Option<Vec<NodeOverride>>,
    last_h: Vec<f64>,
    last_moduli: Vec<f64>,
    last_solution: Option<FeaSolution>,
}

impl Analysis {
    pub fn new(
        problem: &ProblemDef,
        reg: RegularizationParams,
        material: MaterialSpec,
        solver: SolverSettings,
    ) -> Result<Self> {
        problem.validate()?;
        reg.validate()?;
        material.validate()?;
        let grid = problem.grid()?;
        let mesh = problem.mesh()?;
        let forces = distribute_load(&problem.load, &mesh)?;
        let fixed = constrained_dofs(&problem.load, &mesh)?;
        let overrides = node_overrides(&problem.load, &grid);
        let system = FeSystem::new(mesh, &material, &fixed, solver)?;
        Ok(Self {
            grid,
            reg,
            material,
            system,
            forces,
            overrides,
            last_h: Vec::new(),
            last_moduli: Vec::new(),
            last_solution: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn regularization(&self) -> &RegularizationParams {
        &self.reg
    }

    pub fn material(&self) -> &MaterialSpec {
        &self.material
    }

    pub fn system(&self) -> &FeSystem {
        &self.system
    }

    /// Nodal Heaviside values of the most recently evaluated design.
    pub fn nodal_heaviside(&self) -> &[f64] {
        &self.last_h
    }

    /// Background-cell moduli of the most recently evaluated design.
    pub fn cell_moduli(&self) -> &[f64] {
        &self.last_moduli
    }

    pub fn last_solution(&self) -> Option<&FeaSolution> {
        self.last_solution.as_ref()
    }

    /// Structure TDF of `components` including fixed solid/void regions.
    pub fn field<C: Component>(&self, components: &[C]) -> TdfField {
        TdfField::build(components, &self.grid, &self.reg, self.overrides.as_deref())
    }

    /// Compliance and volume of `components`, with their gradients when
    /// `gradients` is set.
    pub fn evaluate<C: Component>(&mut self, components: &[C], gradients: bool) -> Result<Evaluation> {
        let start = Instant::now();
        let field = self.field(components);
        self.last_h = field.heaviside(&self.reg);
        let vol = volume(&field, &self.grid, &self.reg);
        let t_tdf = start.elapsed().as_secs_f64();

        let start = Instant::now();
        self.last_moduli = cell_moduli(&self.last_h, &self.grid, &self.material);
        self.system.assemble(&self.last_moduli);
        let mut solution = self.system.solve(&self.forces)?;
        solution.design_hash = Some(field.design_hash());
        let t_fea = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let (dc, dv) = if gradients {
            let s = sensitivities(components, &field, &solution, &self.system, &self.material, &self.reg)?;
            (Some(s.d_compliance), Some(s.d_volume))
        } else {
            (None, None)
        };
        let t_sen = start.elapsed().as_secs_f64();

        let compliance = solution.compliance;
        self.last_solution = Some(solution);
        Ok(Evaluation {
            compliance,
            volume: vol,
            d_compliance: dc,
            d_volume: dv,
            times: StageTimes { tdf: t_tdf, fea: t_fea, sensitivity: t_sen, mma: 0.0, total: t_tdf + t_fea + t_sen },
        })
    }
}
