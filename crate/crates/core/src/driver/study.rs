//! Resolution studies over the hyper-element ratio.

use crate::error::Result;
use crate::fea::{reanalyze_at_ratio, relative_error};

use super::problem::ProblemDef;
use super::run::{run, RunResult, RunSettings};

/// One optimization run of a resolution study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub ratio: usize,
    pub iterations: usize,
    pub converged: bool,
    pub c_obj: f64,
    pub c_post: f64,
    pub relative_error: f64,
}

impl StudyRow {
    pub fn from_result(result: &RunResult) -> Self {
        Self {
            ratio: result.ratio,
            iterations: result.iterations(),
            converged: result.converged,
            c_obj: result.c_obj,
            c_post: result.c_post.unwrap_or(f64::NAN),
            relative_error: result.relative_error.unwrap_or(f64::NAN),
        }
    }
}

/// Optimizes `problem` once per ratio, keeping everything else fixed.
pub fn resolution_study(problem: &ProblemDef, settings: &RunSettings, ratios: &[usize]) -> Result<Vec<StudyRow>> {
    let mut settings = settings.clone();
    settings.reanalyze = true;
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let mut p = problem.clone();
        p.ratio = ratio;
        p.validate()?;
        rows.push(StudyRow::from_result(&run(&p, &settings)?));
    }
    Ok(rows)
}

/// Compliance of one fixed design analysed at a given ratio, and its
/// relative deviation from the full-resolution compliance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRow {
    pub ratio: usize,
    pub compliance: f64,
    pub relative_error: f64,
}

/// Reanalyses the design given by `cell_moduli` at every ratio, measuring
/// errors against the ratio-1 analysis.
pub fn reanalysis_ladder(
    problem: &ProblemDef,
    settings: &RunSettings,
    cell_moduli: &[f64],
    ratios: &[usize],
) -> Result<Vec<LadderRow>> {
    let grid = problem.grid()?;
    let exact = reanalyze_at_ratio(cell_moduli, &grid, 1, &settings.material, &problem.load, settings.solver)?.compliance;
    ratios
        .iter()
        .map(|&ratio| {
            let c = if ratio == 1 {
                exact
            } else {
                reanalyze_at_ratio(cell_moduli, &grid, ratio, &settings.material, &problem.load, settings.solver)?
                    .compliance
            };
            Ok(LadderRow { ratio, compliance: c, relative_error: relative_error(c, exact) })
        })
        .collect()
}
