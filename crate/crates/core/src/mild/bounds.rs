//! A priori bounds on solutions and the product-integration weights of the
//! bare power kernel.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::operators::norm;
use crate::quad::{cell_weights, check_nodes, PowerKernel};
use crate::specfun::{gamma, mittag_leffler};

use super::problem::{check_exponent, SpectralProblem};

/// `τ₁, τ₂, D₁, D₂, w` together with the exponent bookkeeping behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriBounds {
    /// `τ` before the first impulse.
    pub tau1: f64,
    /// `τ` including the jump offsets `‖φ_i(0)‖`.
    pub tau2: f64,
    /// Bound on the weighted state before the first impulse.
    pub d1: f64,
    /// Bound on the weighted state after an impulse.
    pub d2: f64,
    pub w: f64,
    /// Exponent of `T` in the forcing term: `ν(μ-1) + 1 - 1/p`.
    pub t_exponent: f64,
    /// The same exponent derived from `T^{1-λ}` times the Hölder factor `t^{μ-1/p}`.
    pub t_exponent_derived: f64,
    /// `E_μ(M T^{1+ν(μ-1)} L)`.
    pub gronwall: f64,
}

impl AprioriBounds {
    /// The bound that applies on interval `k`.
    pub fn for_interval(&self, k: usize) -> f64 {
        if k == 0 {
            self.d1
        } else {
            self.d2
        }
    }
}

/// The Gronwall-type bounds `D₁ = τ₁ E_μ(c)` and `D₂ = (τ₂/w) E_μ(c)`,
/// `c = M T^{1+ν(μ-1)} L`.
///
/// ```
/// use std::sync::Arc;
/// use hilfer_relax::mild::{apriori_bounds, ImpulseSchedule, SpectralProblem, ZeroNonlinearity};
/// use hilfer_relax::operators::SpectralGenerator;
/// use hilfer_relax::HilferParams;
///
/// let p = HilferParams::new(0.5, 0.5).unwrap();
/// let gen = SpectralGenerator::new(vec![-1.0]).unwrap();
/// let prob = SpectralProblem::new(gen, p, vec![0.0], 1.0, ImpulseSchedule::none(),
///     Arc::new(ZeroNonlinearity), 4.0).unwrap();
/// let b = apriori_bounds(&prob).unwrap();
/// assert_eq!(b.d1, 0.0);
/// ```
pub fn apriori_bounds(problem: &SpectralProblem) -> Result<AprioriBounds> {
    let params = &problem.params;
    let (mu, nu, lambda) = (params.mu(), params.nu(), params.lambda());
    let p = problem.p;
    check_exponent(params, p)?;
    let adm = problem
        .impulses
        .check(lambda, problem.gen.semigroup_bound())?;
    let m = problem.gen.semigroup_bound();
    let t = problem.horizon;
    let growth = problem.nonlinearity.growth();
    let alpha = growth.alpha.lp_norm(p, t);
    let holder = ((p - 1.0) / (p * mu - 1.0)).powf(1.0 - 1.0 / p);
    let t_exponent = nu * (mu - 1.0) + 1.0 - 1.0 / p;
    let t_exponent_derived = 1.0 - lambda + mu - 1.0 / p;
    let g_lambda = gamma(lambda)?;
    let forcing = m * t.powf(t_exponent) / gamma(mu)? * holder * alpha;
    let tau1 = m * norm(&problem.x0) / g_lambda + forcing;
    let k = problem.modes();
    let zero = vec![0.0; k];
    let mut jumps = 0.0;
    for imp in problem.impulses.impulses() {
        let mut out = vec![0.0; k];
        imp.map.apply(&zero, &mut out);
        jumps += norm(&out);
    }
    let tau2 = tau1 + m / g_lambda * jumps;
    let lip = problem.nonlinearity.lipschitz();
    let gronwall = mittag_leffler(mu, 1.0, m * t.powf(1.0 + nu * (mu - 1.0)) * lip)?;
    Ok(AprioriBounds {
        tau1,
        tau2,
        d1: tau1 * gronwall,
        d2: tau2 / adm.w * gronwall,
        w: adm.w,
        t_exponent,
        t_exponent_derived,
        gronwall,
    })
}

/// Weights `W[i][j]` with `∫_{t_0}^{t_i} (t_i - s)^{μ-1} f(s) ds ≈ Σ_j W[i][j] f(t_j)`,
/// exact for piecewise-linear `f` on the given nodes.
///
/// ```
/// use hilfer_relax::mild::singular_weights;
/// let nodes = [0.0, 0.25, 0.5, 1.0];
/// let w = singular_weights(&nodes, 0.5).unwrap();
/// let one: f64 = w[3].iter().sum();
/// assert!((one - 2.0).abs() < 1e-14); // t^μ/μ at t = 1
/// ```
pub fn singular_weights(nodes: &[f64], mu: f64) -> Result<Vec<Vec<f64>>> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(domain(
            "singular_weights",
            format!("μ must lie in (0, 1], got {mu}"),
        ));
    }
    if nodes.len() < 2 {
        return Err(domain("singular_weights", "need at least two nodes"));
    }
    check_nodes("singular_weights", nodes)?;
    let kernel = PowerKernel {
        order: mu,
        scale: 1.0,
    };
    let mut out = vec![vec![0.0; nodes.len()]; nodes.len()];
    for i in 1..nodes.len() {
        for j in 0..i {
            let (a, b) = cell_weights(&kernel, nodes[i], nodes[j], nodes[j + 1]);
            out[i][j] += a;
            out[i][j + 1] += b;
        }
    }
    Ok(out)
}
