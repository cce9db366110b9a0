//! Sliding methods for bilinearly-coupled saddle-point problems
//! `min_x max_y f(x) + <y, Bx> - g(y)`.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapter;
pub mod baselines;
pub mod bench;
pub mod cli;
pub mod error;
pub mod instance_file;
pub mod instances;
pub mod numerics;
pub mod oracles;
pub mod saddle;
pub mod sliding;
pub mod trace;
pub mod vi;

pub use error::{Error, Result};
