//! Configuration files and output artifacts.

mod components;
mod config;
mod history;
mod raster;
mod vtk;

pub use components::{read_components, write_components};
pub use config::{
    parse_config, BoxConfig, IntegrationConfig, LayoutConfig, MaterialConfig, MmaConfig, PointLoadConfig,
    ProblemConfig, RegularizationConfig, RunConfig, RunControl, SolverConfig, SolverKindConfig, StudyConfig,
    SupportConfig, TractionConfig,
};
pub use history::{read_history, write_history, write_timings, HistorySummary, HISTORY_HEADER};
pub use raster::{gray_level, write_pgm};
pub use vtk::write_vtk;
