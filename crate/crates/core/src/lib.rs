//! Power transformations of compositional data and the small-α theory of the
//! α-transformed Dirichlet model.
//!
//! The crate is organised by concern:
//!
//! - [`simplex`]: compositions, the α-transformation and its inverse, the
//!   centred log-ratio, the α-metric, the Jacobian, and overflow-safe
//!   recovery of log-compositions for tiny |α|.
//! - [`special`]: log-gamma, digamma and trigamma.
//! - [`dirichlet`]: density, seeded sampling and maximum likelihood.
//! - [`alpha_fit`]: the transformed-model likelihood, profile likelihood in
//!   α and the joint fit.
//! - [`asymptotics`]: the coalescing parameterization, the expanded
//!   small-α likelihood, closed-form estimators and the Gaussian limits.
//! - [`sim`]: seeded experiment drivers.
//! - [`io`]: CSV ingestion, dataset registry, reports and config files.
//!
//! Inner loops (per-observation sums, sampling blocks, grid points) run on
//! rayon when the `parallel` feature is enabled; see [`exec`].

pub mod alpha_fit;
pub mod asymptotics;
pub mod dirichlet;
mod error;
pub mod exec;
pub mod io;
pub mod rng;
pub mod sim;
pub mod simplex;
pub mod special;

pub use alpha_fit::{
    fit_direct, profile_curve, profile_loglik, transformed_loglik, AlphaBounds, FitResult,
    ProfileCurve,
};
pub use asymptotics::{
    AsymptoticFit, AsymptoticVariant, CoalescingParams, CumulantSet,
};
pub use dirichlet::DirichletParams;
pub use error::{Error, ErrorCategory, Result};
pub use simplex::{Composition, LogData, LogRatios};

/// Crate version, echoed in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
