//! Configuration, presets and commands behind the `elastolbm` binary.

pub mod commands;
pub mod config;
pub mod presets;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] elastolbm::Error),

    #[error("I/O error: {0}")]
    Io(String),
}

/// Exit codes of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    /// A convergence study missed an order threshold.
    pub const THRESHOLD: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CFL: i32 = 3;
    pub const DIVERGED: i32 = 4;
    pub const IO: i32 = 5;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use elastolbm::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Core(E::Cfl { .. } | E::NotPositiveDefinite { .. }) => exit::CFL,
            CliError::Core(E::Io(_) | E::Snapshot(_)) => exit::IO,
            CliError::Core(_) => exit::CONFIG,
        }
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 picks the default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(elastolbm::Error::Cfl { margin: 1.01 }).exit_code(), 3);
        assert_eq!(CliError::Core(elastolbm::Error::Io("x".into())).exit_code(), 5);
        assert_eq!(CliError::Io("x".into()).exit_code(), 5);
        assert_eq!(CliError::Core(elastolbm::Error::EmptyStudy).exit_code(), 2);
    }

    #[test]
    fn pool_size_is_honoured() {
        assert_eq!(with_workers(3, rayon::current_num_threads).unwrap(), 3);
    }
}
