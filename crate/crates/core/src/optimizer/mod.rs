//! Design updates and termination.

mod convergence;
mod mma;

pub use convergence::{check_convergence, ConvergenceWindow, WINDOW};
pub use mma::{MmaSettings, MmaState, MmaStep};
