// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod modal;
pub mod pipeline;
pub mod recording;
pub mod room;
pub mod rtf;
pub mod specfun;
pub mod synthesis;
pub mod translation;

pub use error::{Error, Result};
