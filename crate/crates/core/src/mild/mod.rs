//! The impulsive mild-solution equation on graded meshes.
//!
//! The unknown is stored as `y(t) = (t - t_k)^{1-λ} x(t)` on each interval
//! `(t_k, t_{k+1}]`, which is bounded even where `x` blows up. The Picard
//! operator
//!
//! `(𝒢x)(t) = S(t)x₀ + Σ_{t_i<t} S(t - t_i) φ_i(x(t_i^-)) + ∫_0^t (t-s)^{μ-1} P_μ(t-s) f(s, x(s)) ds`
//!
//! is discretized by product integration: the forcing is interpolated
//! linearly on each cell and integrated exactly against the resolvent kernel.

mod bounds;
mod mesh;
mod picard;
mod problem;
mod propagator;
mod trajectory;

pub use bounds::{apriori_bounds, singular_weights, AprioriBounds};
pub use mesh::{Cell, Mesh, MeshSpec, Node};
pub use picard::{
    picard_solve, FixedControl, FnRhs, PicardDiagnostics, PicardOptions, RadiusReport, Rhs, Solver,
    Workspace, CERTIFIED_RATIO, MAX_RESTARTS,
};
pub use problem::{
    Alpha, ConstantJump, FnNonlinearity, GrowthBound, Impulse, ImpulseMap, ImpulseSchedule,
    JumpAdmissibility, LinearNonlinearity, Nonlinearity, SpectralProblem, StatePoint,
    ZeroNonlinearity,
};
pub use propagator::{ModeKernel, Propagator, ResolventTables};
pub use trajectory::Trajectory;
