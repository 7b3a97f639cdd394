use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Order `μ`, type `ν` and the composite index `λ = μ + ν - μν`.
///
/// `μ = 1` is admitted so that the classical first-order limit can be solved
/// with the same machinery; the fractional results need `μ < 1`.
///
/// ```
/// use hilfer_relax::HilferParams;
/// let p = HilferParams::new(0.5, 0.8).unwrap();
/// assert!((p.lambda() - 0.9).abs() < 1e-15);
/// assert!(HilferParams::new(0.0, 0.5).is_err());
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct HilferParams {
    mu: f64,
    nu: f64,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    mu: f64,
    nu: f64,
}

impl TryFrom<RawParams> for HilferParams {
    type Error = crate::Error;
    fn try_from(r: RawParams) -> Result<Self> {
        HilferParams::new(r.mu, r.nu)
    }
}

impl From<HilferParams> for RawParams {
    fn from(p: HilferParams) -> Self {
        RawParams { mu: p.mu, nu: p.nu }
    }
}

impl HilferParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(domain(
                "HilferParams",
                format!("mu must lie in (0, 1], got {mu}"),
            ));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(domain(
                "HilferParams",
                format!("nu must lie in [0, 1], got {nu}"),
            ));
        }
        // this form of μ + ν - μν is exactly 1 whenever μ or ν is
        let lambda = 1.0 - (1.0 - mu) * (1.0 - nu);
        debug_assert!(lambda > 0.0 && lambda <= 1.0 + 1e-15);
        debug_assert!(lambda >= mu - 1e-15 && lambda >= nu - 1e-15);
        Ok(Self {
            mu,
            nu,
            lambda: lambda.min(1.0),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ = ν` holds only in the first-order limit `μ = 1` (or `ν = 1`).
    pub fn lambda_equals_nu(&self) -> bool {
        self.lambda == self.nu
    }

    /// Exponent of the Riemann-Liouville integral hidden in `S_{μ,ν}`: `ν(1-μ)`.
    pub fn smoothing_order(&self) -> f64 {
        self.nu * (1.0 - self.mu)
    }
}
