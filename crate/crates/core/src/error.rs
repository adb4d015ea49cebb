//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("non-manifold edge ({v0}, {v1}) shared by more than two cells")]
    NonManifoldEdge { v0: usize, v1: usize },

    #[error("cell {cell} is degenerate (zero signed area)")]
    DegenerateCell { cell: usize },

    #[error("boundary marker references edge ({v0}, {v1}) which is not a boundary edge")]
    MarkerNotBoundary { v0: usize, v1: usize },

    #[error("mesh area {computed} does not match declared area {declared}")]
    AreaMismatch { computed: f64, declared: f64 },

    #[error("point ({x}, {y}) lies outside cell {cell}")]
    PointOutsideCell { cell: usize, x: f64, y: f64 },

    #[error("invalid symmetrization parameter theta = {0}; must be -1, 0 or 1")]
    InvalidTheta(i32),

    #[error("invalid penalty parameter alpha = {0}; must be positive")]
    InvalidAlpha(f64),

    #[error("nonpositive viscosity {mu} sampled in cell {cell}")]
    NonpositiveViscosity { cell: usize, mu: f64 },

    #[error("problem has Dirichlet facets but no Dirichlet data")]
    MissingDirichletData,

    #[error("problem has Neumann facets but no Neumann data")]
    MissingNeumannData,

    #[error("exact solution fields required but not provided")]
    MissingExactFields,

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("AMG setup failed: {0}")]
    AmgSetup(String),

    #[error("inner velocity-block solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    InnerSolve { iterations: usize, residual: f64 },

    #[error("power iteration stagnated after {iterations} iterations (residual {residual:.3e})")]
    PowerIterationStagnation { iterations: usize, residual: f64 },

    #[error("solver did not converge: {0}")]
    SolverFailure(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
