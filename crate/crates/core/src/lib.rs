//! Choice-based conjoint experiments over rating summaries.
//!
//! The crate covers the whole pipeline: deriving attribute levels from a
//! ratings dataset, building and scoring choice designs, simulating and
//! estimating multinomial logit part-worths, scoring the short
//! maximization scale, and feeding attribute utilities into a
//! utility-aware matrix factorization.

pub mod choice;
pub mod design;
mod error;
pub mod linalg;
pub mod mf;
pub mod presets;
pub mod psych;
pub mod ratings;

pub use error::{Error, ErrorKind, Result};
