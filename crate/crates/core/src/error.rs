use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid discretization: {0}")]
    Discretization(String),

    #[error("invalid material: {0}")]
    Material(String),

    #[error("relaxation rate omega = {0} outside (0, 2]")]
    Omega(f64),

    #[error("link ({i},{j}) is not a missing incoming link of node {node}")]
    NotBoundaryLink { node: usize, i: i32, j: i32 },

    #[error("operation requires a {expected} lattice")]
    WrongMode { expected: &'static str },

    #[error("CFL condition violated: margin {margin:.6} >= 1")]
    Cfl { margin: f64 },

    #[error("symmetrizer block k_{link} is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { link: String, min_eig: f64 },

    #[error("algebra check failed: {0}")]
    Algebra(String),

    #[error("unknown manufactured case '{0}'")]
    UnknownCase(String),

    #[error("case '{0}' has no exact solution to compare against")]
    NoExactSolution(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("convergence study needs at least one discretization and one material")]
    EmptyStudy,

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
