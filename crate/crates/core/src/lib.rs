// float constants are kept at full published precision; negated comparisons reject NaN
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod berezin;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod spaces;
pub mod operators;
pub mod quadrature;
pub mod special;
pub mod unitaries;

pub use error::{Error, Result};
