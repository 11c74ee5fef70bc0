//! Fixtures shared by the benchmarks.

use mmc_core::driver::{cantilever, initial_layout, ProblemDef, RunSettings};
use mmc_core::geometry::Component2D;

/// Cantilever with the standard 576-component initial layout.
pub fn cantilever_fixture(background: [usize; 2], ratio: usize) -> (ProblemDef, Vec<Component2D>, RunSettings) {
    let problem = cantilever(background, ratio, [12, 6]);
    let settings = RunSettings::default();
    let comps = initial_layout(problem.lengths, &problem.layout, problem.volume_limit(), settings.p_exp)
        .expect("standard layout is valid");
    (problem, comps, settings)
}
