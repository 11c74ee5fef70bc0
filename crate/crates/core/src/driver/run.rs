//! The optimization loop.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fea::{reanalyze_on_background, MaterialSpec, SolverSettings};
use crate::geometry::{Component, Component2D, Component3D, RegularizationParams};
use crate::mesh::{partition_bounds, DesignBounds, Grid, ParameterBounds};
use crate::optimizer::{check_convergence, ConvergenceWindow, MmaSettings, MmaState};

use super::analysis::{Analysis, StageTimes};
use super::layout::{flatten, initial_layout, unflatten, Design, LayoutComponent};
use super::problem::ProblemDef;

/// Algorithm settings shared by every problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub p_exp: i32,
    pub ks_l: f64,
    pub alpha_min: f64,
    /// Transition half-width as a multiple of the smallest background spacing.
    pub epsilon_factor: f64,
    pub material: MaterialSpec,
    pub mma: MmaSettings,
    /// Per-step move limit for centers and sizes as a fraction of their range.
    pub move_fraction: f64,
    /// Per-step move limit for angles, in radians.
    pub angle_move: f64,
    /// Upper bound of half-lengths as a fraction of the smallest domain edge.
    pub length_limit: f64,
    /// Upper bound of half-thicknesses as a fraction of the smallest domain edge.
    pub thickness_limit: f64,
    pub max_iterations: usize,
    pub threshold: f64,
    pub solver: SolverSettings,
    /// Re-solve the final design on the full background mesh.
    pub reanalyze: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            p_exp: 6,
            ks_l: 100.0,
            alpha_min: 1e-3,
            epsilon_factor: 2.0,
            material: MaterialSpec::default(),
            mma: MmaSettings::default(),
            move_fraction: 0.2,
            angle_move: 0.1,
            length_limit: 0.5,
            thickness_limit: 0.1,
            max_iterations: 1000,
            threshold: 5e-4,
            solver: SolverSettings::default(),
            reanalyze: true,
        }
    }
}

impl RunSettings {
    pub fn regularization(&self, grid: &Grid) -> Result<RegularizationParams> {
        RegularizationParams::new(self.epsilon_factor * grid.min_spacing(), self.alpha_min, self.ks_l, self.p_exp)
    }
}

/// One row of the optimization history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub index: usize,
    pub compliance: f64,
    /// Material volume including the void floor, as constrained.
    pub volume: f64,
    pub volume_fraction: f64,
    pub times: StageTimes,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<IterationRecord>,
    pub initial: Design,
    /// The last evaluated design.
    pub design: Design,
    pub converged: bool,
    /// Compliance of the final design on the hyper-element mesh.
    pub c_obj: f64,
    /// Compliance of the final design on the background mesh.
    pub c_post: Option<f64>,
    pub relative_error: Option<f64>,
    pub grid: Grid,
    pub ratio: usize,
    /// Nodal Heaviside values of the final design.
    pub nodal_heaviside: Vec<f64>,
    /// Background-cell moduli of the final design.
    pub cell_moduli: Vec<f64>,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Mean of each stage time over all iterations.
    pub fn mean_times(&self) -> StageTimes {
        let n = self.records.len().max(1) as f64;
        let mut t = StageTimes::default();
        for r in &self.records {
            t.tdf += r.times.tdf / n;
            t.fea += r.times.fea / n;
            t.sensitivity += r.times.sensitivity / n;
            t.mma += r.times.mma / n;
            t.total += r.times.total / n;
        }
        t
    }
}

/// Box bounds and move limits for a design of type `C` on `problem`.
pub fn design_bounds<C: Component>(
    problem: &ProblemDef,
    settings: &RunSettings,
    components: &[C],
) -> Result<(DesignBounds, Vec<f64>)> {
    let min_edge = problem.lengths[..problem.dim].iter().copied().fold(f64::INFINITY, f64::min);
    let size_upper: Vec<f64> = (0..C::SIZE_PARAMS.len())
        .map(|i| if i == 0 { settings.length_limit } else { settings.thickness_limit } * min_edge)
        .collect();
    let global = ParameterBounds::for_domain::<C>(problem.lengths, problem.dim, &size_upper)?;
    let bounds = partition_bounds(&problem.subregions()?, components, &global)?;
    let np = C::NUM_PARAMS;
    let moves = (0..bounds.lower.len())
        .map(|i| {
            if C::ANGLE_PARAMS.contains(&(i % np)) {
                settings.angle_move
            } else {
                settings.move_fraction * (bounds.upper[i] - bounds.lower[i])
            }
        })
        .collect();
    Ok((bounds, moves))
}

/// Runs the problem from its configured initial layout.
pub fn run(problem: &ProblemDef, settings: &RunSettings) -> Result<RunResult> {
    run_with_observer(problem, settings, |_, _| {})
}

/// Like [`run`], calling `observer` after every evaluated iteration with
/// its record and design.
pub fn run_with_observer(
    problem: &ProblemDef,
    settings: &RunSettings,
    observer: impl FnMut(&IterationRecord, &Design),
) -> Result<RunResult> {
    let initial = layout_for(problem, settings)?;
    run_from(problem, settings, initial, observer)
}

/// The configured initial layout of `problem`.
pub fn layout_for(problem: &ProblemDef, settings: &RunSettings) -> Result<Design> {
    let v_bar = problem.volume_limit();
    match problem.dim {
        2 => Ok(Design::Planar(initial_layout(problem.lengths, &problem.layout, v_bar, settings.p_exp)?)),
        3 => Ok(Design::Solid(initial_layout(problem.lengths, &problem.layout, v_bar, settings.p_exp)?)),
        d => Err(Error::Dimension(format!("unsupported dimension {d}"))),
    }
}

/// Runs the problem starting from `initial`.
pub fn run_from(
    problem: &ProblemDef,
    settings: &RunSettings,
    initial: Design,
    observer: impl FnMut(&IterationRecord, &Design),
) -> Result<RunResult> {
    if initial.dim() != problem.dim {
        return Err(Error::Dimension(format!("{}D design for a {}D problem", initial.dim(), problem.dim)));
    }
    match initial {
        Design::Planar(c) => optimize::<Component2D>(problem, settings, c, observer),
        Design::Solid(c) => optimize::<Component3D>(problem, settings, c, observer),
    }
}

fn optimize<C: LayoutComponent>(
    problem: &ProblemDef,
    settings: &RunSettings,
    initial: Vec<C>,
    mut observer: impl FnMut(&IterationRecord, &Design),
) -> Result<RunResult> {
    if settings.max_iterations == 0 {
        return Err(Error::Config { path: "max_iterations".into(), message: "must be at least 1".into() });
    }
    let grid = problem.grid()?;
    let reg = settings.regularization(&grid)?;
    let mut analysis = Analysis::new(problem, reg, settings.material, settings.solver)?;
    let v_bar = problem.volume_limit();
    let v_domain = problem.domain_measure();
    let (bounds, moves) = design_bounds(problem, settings, &initial)?;

    let mut x = flatten(&initial);
    for (i, v) in x.iter_mut().enumerate() {
        *v = v.clamp(bounds.lower[i], bounds.upper[i]);
    }
    let mut mma = MmaState::new(x.len(), moves, settings.mma)?;
    let mut window = ConvergenceWindow::new();
    let mut records = Vec::new();
    let mut converged = false;
    let mut components: Vec<C> = unflatten(&x)?;

    for it in 1..=settings.max_iterations {
        let start = Instant::now();
        let eval = analysis
            .evaluate(&components, true)
            .map_err(|e| Error::Analysis { iteration: it, source: Box::new(e) })?;
        // Scaling by the current compliance keeps the objective O(1) even
        // when the first design is barely connected and far stiffer ones
        // follow.
        let scale = if eval.compliance > 0.0 { 1.0 / eval.compliance } else { 1.0 };
        let volume = eval.volume.raw;
        window.push(eval.compliance, volume);
        let mut times = eval.times;
        let mut record = IterationRecord {
            index: it,
            compliance: eval.compliance,
            volume,
            volume_fraction: volume / v_domain,
            times,
        };

        let done = window.is_full() && check_convergence(&window, v_bar, settings.threshold);
        if done || it == settings.max_iterations {
            converged = done;
            times.total = start.elapsed().as_secs_f64();
            record.times = times;
            observer(&record, &C::into_design(components.clone()));
            records.push(record);
            break;
        }

        let mma_start = Instant::now();
        let df0: Vec<f64> = eval.d_compliance.unwrap_or_default().iter().map(|d| d * scale).collect();
        let dg: Vec<f64> = eval.d_volume.unwrap_or_default().iter().map(|d| d / v_bar).collect();
        let step = mma.update(&x, &df0, volume / v_bar - 1.0, &dg, &bounds.lower, &bounds.upper)?;
        x = step.x;
        times.mma = mma_start.elapsed().as_secs_f64();
        times.total = start.elapsed().as_secs_f64();
        record.times = times;
        observer(&record, &C::into_design(components.clone()));
        records.push(record);
        components = unflatten(&x)?;
    }

    let c_obj = records.last().map_or(0.0, |r| r.compliance);
    let cell_moduli = analysis.cell_moduli().to_vec();
    let (c_post, relative_error) = if !settings.reanalyze {
        (None, None)
    } else if problem.ratio == 1 {
        (Some(c_obj), Some(0.0))
    } else {
        let (c, e) =
            reanalyze_on_background(&cell_moduli, &grid, &settings.material, &problem.load, settings.solver, c_obj)?;
        (Some(c), Some(e))
    };
    Ok(RunResult {
        records,
        initial: C::into_design(initial),
        design: C::into_design(components),
        converged,
        c_obj,
        c_post,
        relative_error,
        grid,
        ratio: problem.ratio,
        nodal_heaviside: analysis.nodal_heaviside().to_vec(),
        cell_moduli,
    })
}
