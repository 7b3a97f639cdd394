//! Costs of ordinary and relaxed controls, derivative-free minimization of
//! both, and the report comparing the two minima.

mod cost;
mod hypotheses;
mod report;
mod search;

pub use cost::{
    cost_along, cost_ordinary, cost_relaxed, CostIntegrand, DoubleWell, FnIntegrand, COST_POINTS,
};
pub use hypotheses::{
    exponent_clauses, jump_clauses, validate_hypotheses, Ledger, LedgerEntry, PROBES,
};
pub use report::{bound_compliance, chattering_ladder, relaxation_report, RelaxationReport};
pub use search::{
    minimize_ordinary, minimize_ordinary_with, minimize_relaxed, minimize_relaxed_with, Evaluator,
    OrdinarySearch, RelaxedSearch, SearchSpec,
};
