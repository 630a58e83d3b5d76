use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped into categories (see [`Error::category`]) that the
/// command-line front end maps onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation left the representable floating-point range.
    #[error("numerical range error in component {component}: {detail}")]
    NumericalRange { component: usize, detail: String },

    /// An iterative solver did not converge.
    #[error("no convergence after {iterations} iterations (score max-norm {grad_norm:.3e}){}", context.as_deref().map(|c| format!(": {c}")).unwrap_or_default())]
    Convergence {
        iterations: usize,
        grad_norm: f64,
        last_iterate: Vec<f64>,
        context: Option<String>,
    },

    /// The data carry no information for an estimator (e.g. replicated rows).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Every candidate point failed during a fit.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Invalid simulation or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file contents.
    #[error("{path}: {detail}")]
    Input { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error classes, used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Domain,
    Convergence,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } | Error::Input { .. } | Error::Config(_) => ErrorCategory::Io,
            Error::Domain(_)
            | Error::NumericalRange { .. }
            | Error::DegenerateData(_)
            | Error::Fit(_) => ErrorCategory::Domain,
            Error::Convergence { .. } => ErrorCategory::Convergence,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attach a context note to a convergence error; other variants pass through.
    pub fn with_context(self, note: impl Into<String>) -> Self {
        match self {
            Error::Convergence {
                iterations,
                grad_norm,
                last_iterate,
                context,
            } => {
                let note = note.into();
                let context = Some(match context {
                    Some(c) => format!("{note}: {c}"),
                    None => note,
                });
                Error::Convergence {
                    iterations,
                    grad_norm,
                    last_iterate,
                    context,
                }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
