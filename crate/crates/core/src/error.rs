use thiserror::Error;

/// Errors raised by the numerical kernels, solvers and validators.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A series or quadrature did not reach its accuracy target.
    #[error("{op}: accuracy target missed, achieved bound {achieved:.3e}")]
    Accuracy { op: &'static str, achieved: f64 },

    /// A value is not representable as a finite `f64`.
    #[error("{op}: result overflows f64")]
    Overflow { op: &'static str },

    /// Picard sweeps stopped contracting.
    #[error("picard iteration diverged: update ratio above {threshold} for {sweeps} consecutive sweeps (last {last_ratio:.3})")]
    Divergence {
        threshold: f64,
        sweeps: usize,
        last_ratio: f64,
    },

    /// Picard sweeps exhausted the sweep budget without reaching the tolerance.
    #[error("picard iteration stalled after {sweeps} sweeps (last update {last_update:.3e})")]
    Stalled { sweeps: usize, last_update: f64 },

    /// The weighted-norm radius search could not certify a contraction.
    #[error("no contractive radius after {doublings} doublings (last factor {factor:.3})")]
    NonContractive { doublings: usize, factor: f64 },

    /// A declared hypothesis constant fails its admissibility bound.
    #[error("hypothesis {clause} violated: {detail}")]
    Hypothesis { clause: String, detail: String },

    /// A control cannot be refined to the requested resolution.
    #[error("refinement error: {0}")]
    Refinement(String),

    /// A control is malformed.
    #[error("invalid control: {0}")]
    Control(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
