//! Grouped Fourier and cosine transforms over ANOVA-structured frequency
//! index sets, regularized least-squares solvers, and the approximation
//! pipeline built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod index;
pub mod model;
pub mod solvers;
pub mod test_functions;
pub mod transform;

pub use error::{Error, Result};
