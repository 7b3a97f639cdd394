//! Scalar special functions behind the operator families: Γ, the
//! two-parameter Mittag-Leffler function, the Wright-type density `ξ_μ`,
//! and the Riemann-Liouville integral of sampled data.
//!
//! Every function here is pure and safe to call from any thread.

mod gamma;
mod mittag_leffler;
mod ml_table;
mod params;
mod rl;
mod wright;

pub use gamma::{gamma, ln_gamma, rgamma};
pub use mittag_leffler::mittag_leffler;
pub use ml_table::MittagLefflerTable;
pub use params::HilferParams;
pub use rl::{rl_integral, SampledFunction};
pub use wright::{
    wright_series, wright_truncated, xi_density, xi_expectation, WrightSum, WRIGHT_MAX_TERMS,
    WRIGHT_RELATIVE_STOP,
};
