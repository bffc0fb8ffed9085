#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod cerf;
pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod parallel;
pub mod params;
pub mod poles;
pub mod quad;

pub use error::{Error, Result};
