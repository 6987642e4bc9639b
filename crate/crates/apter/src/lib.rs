//! Prognostic-index learning for right-censored survival data in high
//! dimension, via exponential reweighting of univariate expert banks.
//!
//! The crate covers the full pipeline:
//!
//! - [`survival`]: data types, CSV ingestion, the past-event set and the
//!   concordance index;
//! - [`experts`]: duplicated (±) and sign-corrected univariate expert banks
//!   with training-set standardization;
//! - [`aggregation`]: per-round losses, exponential reweighting, the
//!   averaged weight vector p̂, prediction and model serialization;
//! - [`screening`]: marginal (SIS-style) and iterated feature screening;
//! - [`synthetic`]: a seeded benchmark generator with exponential
//!   censoring;
//! - [`harness`]: randomized train/test protocol, ν cross-validation and
//!   the regret sweep.

pub mod aggregation;
pub mod error;
pub mod experts;
pub mod harness;
pub mod screening;
pub mod survival;
pub mod synthetic;

pub use error::{Error, Result};
