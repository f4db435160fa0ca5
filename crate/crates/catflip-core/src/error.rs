//! Error taxonomy shared by all modules.
//!
//! Every failure mode is a typed variant so that callers (in particular the
//! CLI) can map errors onto exit codes and machine-readable reports without
//! string matching.

use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// The Fock-space cutoff is too small for the requested computation, or a
    /// result drifted by more than the allowed tolerance when recomputed with
    /// a padded cutoff.
    #[error("truncation inadequate: {context}")]
    TruncationError { context: String },

    /// Cat states are numerically degenerate for very small `alpha^2`
    /// (the normalization `1 - e^{-2 alpha^2}` loses conditioning).
    #[error("cat encoding degenerate at alpha^2 = {alpha2} (minimum 0.05)")]
    DegenerateCat { alpha2: f64 },

    /// An argument would push `exp`/`sinh`-type factors outside the
    /// double-precision range.
    #[error("overflow guard tripped for {what} = {value}")]
    OverflowGuard { what: &'static str, value: f64 },

    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {context}")]
    DomainError { context: String },

    /// Matrix/vector dimensions do not match.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A Hermitian operator was required.
    #[error("operator not Hermitian: max deviation {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    /// An iterative or truncated sum failed its self-consistency check.
    #[error("convergence failure: {context}")]
    ConvergenceError { context: String },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature failed to reach tolerance: {context}")]
    QuadratureFailure { context: String },

    /// The dense eigensolver did not converge or returned an invalid
    /// decomposition.
    #[error("eigensolver failure: {context}")]
    EigensolverFailure { context: String },

    /// A documented precondition of the called operation was violated.
    #[error("precondition violated: {context}")]
    PreconditionViolated { context: String },

    /// The closed-form table does not cover the requested operator order.
    #[error("no closed-form entry for dissipator order m = {m} (table covers m <= 5)")]
    UnsupportedOrder { m: usize },

    /// The generator does not commute with the joint parity map, so parity
    /// sector blocks are undefined.
    #[error("generator is not parity covariant (commutator norm {norm:.3e})")]
    NotParityCovariant { norm: f64 },

    /// Two spectral candidates score too close to select one reliably.
    #[error("ambiguous eigenvalue selection: scores {best:.3e} vs {runner_up:.3e}")]
    AmbiguousSelection { best: f64, runner_up: f64 },

    /// The decay signal died below the floating-point floor before a usable
    /// fitting window was observed.
    #[error("decay signal too small: {context}")]
    SignalTooSmall { context: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
