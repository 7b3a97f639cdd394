// `!(x > 0.0)` is the idiom that also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crosscheck;
pub mod error;
pub mod mild;
pub mod operators;
pub mod optimal;
pub mod quad;
pub mod relax;
pub mod scenario;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use specfun::HilferParams;
