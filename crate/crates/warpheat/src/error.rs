//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by construction, evaluation and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    /// No parameter choice satisfies an assumption at some index.
    #[error("infeasible schedule: {assumption} violated ({detail})")]
    InfeasibleSchedule { assumption: String, detail: String },

    /// Evaluation requested outside the representable domain.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Argument violates a mathematical precondition (nonpositive f, α ≤ 0, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// Cap constant came out nonpositive.
    #[error("nonpositive cap constant: {0}")]
    NonpositiveCap(String),

    /// Smoothing windows overlap or stick out of their bands.
    #[error("overlapping or oversized smoothing window at joint {0}")]
    OverlappingWindow(usize),

    /// Time stepping failed or discrete mass grew.
    #[error("solver non-convergence: {0}")]
    NonConvergence(String),

    /// Eigensolver failed to converge or J exceeds the grid resolution.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    /// Truncated eigen-expansion is unreliable at the requested time.
    #[error("time {t:.3e} too small for truncation level {j}: tail bound {bound:.3e}")]
    TruncationTime { t: f64, j: usize, bound: f64 },

    /// Kernel seeding time too close to the target time.
    #[error("seed time {t_seed:.3e} too large for target {t:.3e}")]
    SeedTimeTooLarge { t_seed: f64, t: f64 },

    /// Dirichlet kernels failed the maximum-principle ordering.
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    /// A limit profile has nonpositive first derivative at a sample.
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    /// Surrogate band specification is invalid.
    #[error("invalid band specification: {0}")]
    InvalidBand(String),

    /// Configuration file problem (unknown key, bad value, missing file).
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class for the CLI: 1 for assumption/certification
    /// failures, 2 for numerical non-convergence, 3 for config/io problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InfeasibleSchedule { .. } => 1,
            Error::Config(_) | Error::Io(_) => 3,
            _ => 2,
        }
    }
}
