//! The chapters of `book/src`, included so that `cargo test` runs every
//! Rust example in them.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
mod model {}

#[doc = include_str!("../../../book/src/special-functions.md")]
mod special_functions {}

#[doc = include_str!("../../../book/src/solver.md")]
mod solver {}

#[doc = include_str!("../../../book/src/relaxation.md")]
mod relaxation {}

#[doc = include_str!("../../../book/src/optimal-control.md")]
mod optimal_control {}

#[doc = include_str!("../../../book/src/command-line.md")]
mod command_line {}

#[doc = include_str!("../../../book/src/verification.md")]
mod verification {}
