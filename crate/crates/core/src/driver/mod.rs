//! Benchmark problems, initial layouts and the optimization loop.

mod analysis;
mod checks;
mod layout;
mod problem;
mod run;
mod study;

pub use checks::{invariant_checks, CheckOutcome};
pub use analysis::{Analysis, Evaluation, StageTimes};
pub use layout::{flatten, initial_layout, jitter_design, superellipse_fill, unflatten, Design, LayoutComponent, LayoutRecipe};
pub use problem::{
    builtin, cantilever, distributed_load, mbb, planar_layout, torsion_box, ProblemDef, Symmetry, BUILTIN_NAMES,
    DISK_RADIUS, DISK_THICKNESS, VOID_RADIUS,
};
pub use run::{design_bounds, layout_for, run, run_from, run_with_observer, IterationRecord, RunResult, RunSettings};
pub use study::{reanalysis_ladder, resolution_study, LadderRow, StudyRow};
