// `!(x >= tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discord;
pub mod entropy;
pub mod error;
pub mod measure;
pub mod parallel;
pub mod protocols;
pub mod qmat;
pub mod rescalc;
pub mod states;
pub mod suites;

pub use error::{Error, Result};
