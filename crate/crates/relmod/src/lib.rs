//! Relational models for discrete probability distributions.
//!
//! A relational model is generated by a 0-1 model matrix `A` via
//! `log p = A' theta`, without requiring the all-ones vector (the overall
//! effect) to lie in the row space of `A`. This crate provides:
//!
//! - model validation, exact kernel bases and generalized odds ratios,
//! - transformations that add or remove the overall effect and homogenize
//!   a model by augmenting the sample space,
//! - MLE existence certification through facial sets (exact rational LP),
//! - maximum likelihood fitting via G-IPF and G-IPFm, including the
//!   extended (zero-allowing) MLE,
//! - a brute-force likelihood maximizer used as an independent oracle.

pub mod exact;
pub mod model;
pub mod kernel;
pub mod transform;
pub mod simplex;
pub mod facial;
pub mod fit;
pub mod oracle;
pub mod catalog;
pub mod io;

pub use facial::{existence_check, ExistenceReport};
pub use fit::{
    fit, fit_extended, fit_gipf, fit_gipfm, inner_solve, Algorithm, ExtendedMode, FitError,
    FitOptions, MleResult,
};
pub use kernel::{
    kernel_basis, log_linear_params, membership_residuals, odds_ratio_specs, KernelBasis,
    OddsRatioSpec,
};
pub use model::{
    has_overall_effect, validate_model, Distribution, ModelError, ModelMatrix, Observed,
    SampleSpace,
};
pub use oracle::{brute_force_mle, OracleOptions, OracleResult};
pub use transform::{add_overall, homogenize, remove_overall, ReductionReport, TransformError};
