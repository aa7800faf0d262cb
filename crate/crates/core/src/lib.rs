// NaN-rejecting guards are written as negated comparisons; index loops mirror the math;
// oracle constants keep every digit of their reference values.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod bodies;
pub mod ellipsoids;
pub mod error;
pub mod mahler;
pub mod numkernel;
pub mod ops;
pub mod volume;

pub use error::{Error, Result};
