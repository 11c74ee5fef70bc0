use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid component: {0}")]
    InvalidComponent(String),

    #[error("rotation angle {name} = {value} lies outside (-pi/2, pi/2]")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("hyper-element ratio {ratio} does not divide {cells} background cells along {axis}")]
    NonDivisibleRatio { axis: char, cells: usize, ratio: usize },

    #[error("component center {center:?} lies outside the design domain")]
    CenterOutsideDomain { center: [f64; 3] },

    #[error("invalid load case: {0}")]
    InvalidLoad(String),

    #[error("stiffness matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("iterative solver stalled after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("solution belongs to a different design than the one supplied")]
    StaleSolution,

    #[error("non-finite value in optimizer input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("finite element analysis failed at iteration {iteration}: {source}")]
    Analysis {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
