//! Process-level error type: every failure carries the exit code it maps to
//! and renders as a single-line machine-readable JSON object on stderr.

use catflip_core::error::CoreError;

/// Exit code for invalid configuration (bad flags, bad JSON, bad values).
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical non-convergence or an unusable numerical regime.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for internal faults (solver breakdown, I/O, broken invariants).
pub const EXIT_INTERNAL: i32 = 4;

/// A fatal CLI error: exit code, short message, and the context in which it
/// occurred.
#[derive(Debug, Clone)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    pub context: String,
}

impl CliError {
    pub fn config(message: impl Into<String>, context: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
            context: context.into(),
        }
    }

    pub fn numerical(message: impl Into<String>, context: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
            context: context.into(),
        }
    }

    pub fn internal(message: impl Into<String>, context: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
            context: context.into(),
        }
    }

    /// Wrap an engine error, attaching the call-site context.
    pub fn from_core(err: &CoreError, context: impl Into<String>) -> Self {
        let code = match err {
            // The caller asked for something outside the validated domain.
            CoreError::DomainError { .. }
            | CoreError::DegenerateCat { .. }
            | CoreError::OverflowGuard { .. }
            | CoreError::UnsupportedOrder { .. } => EXIT_CONFIG,
            // The computation ran but did not settle to a usable answer.
            CoreError::TruncationError { .. }
            | CoreError::ConvergenceError { .. }
            | CoreError::QuadratureFailure { .. }
            | CoreError::AmbiguousSelection { .. }
            | CoreError::SignalTooSmall { .. } => EXIT_NUMERICAL,
            // Anything else is a fault in our own plumbing.
            CoreError::DimensionMismatch { .. }
            | CoreError::NotHermitian { .. }
            | CoreError::EigensolverFailure { .. }
            | CoreError::PreconditionViolated { .. }
            | CoreError::NotParityCovariant { .. } => EXIT_INTERNAL,
        };
        Self {
            code,
            message: err.to_string(),
            context: context.into(),
        }
    }

    /// The `{code, message, context}` object printed on stderr.
    pub fn render_json(&self) -> String {
        serde_json::json!({
            "code": self.code,
            "message": self.message,
            "context": self.context,
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.message, self.context)
    }
}

impl std::error::Error for CliError {}
