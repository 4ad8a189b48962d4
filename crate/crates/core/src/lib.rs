//! Schwinger proper-time expansion of the heat kernel and zeta function for
//! a massive scalar field around a spinning point source in 2+1 dimensions.
//!
//! Every closed form is paired with a brute-force quadrature in [`oracle`].

// Negated comparisons are the NaN-rejecting domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod expansion;
pub mod geometry;
pub mod kernel_terms;
pub mod oracle;

pub use error::{Error, Result};
