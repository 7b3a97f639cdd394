//! Ordinary and relaxed (probability-valued) controls on a finite control
//! grid, the relaxed vector field, and the chattering construction that
//! approximates relaxed controls by ordinary ones.

mod chattering;
mod controls;
mod solve;

pub use chattering::{chattering_approximate, weak_star_gap, TestFamily, MIN_SLOT};
pub use controls::{
    embed_dirac, uniform_breakpoints, ControlGrid, OrdinaryControl, RelaxedControl, SIMPLEX_TOL,
};
pub use solve::{
    control_solver, relaxed_rhs, solve_ordinary, solve_relaxed, trajectory_gap, GapPoint,
    RelaxedRhs,
};
