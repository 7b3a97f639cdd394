use std::sync::Arc;

use crate::error::Result;
use crate::mild::{MeshSpec, Solver, SpectralProblem, StatePoint, Trajectory};
use crate::quad::gauss_legendre;
use crate::relax::{embed_dirac, relaxed_rhs, ControlGrid, OrdinaryControl, RelaxedControl};

/// Gauss-Legendre points per mesh cell in cost quadrature.
pub const COST_POINTS: usize = 3;

/// The running cost `𝓛(t, x, η)` with its declared envelope.
///
/// The state is handed over as a [`StatePoint`], so an integrand may use the
/// stored `y` or reconstruct `x`.
pub trait CostIntegrand: Send + Sync {
    fn eval(&self, at: &StatePoint<'_>, eta: f64) -> f64;
    /// `𝔟_r(t)`: a bound on `|𝓛(t, ·, η)|` over states with `‖y‖ ≤ r` and all `η ∈ Λ`.
    fn envelope(&self, r: f64, t: f64) -> f64;
}

type CostFn = dyn Fn(&StatePoint<'_>, f64) -> f64 + Send + Sync;
type EnvelopeFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Closure-backed integrand.
#[derive(Clone)]
pub struct FnIntegrand {
    f: Arc<CostFn>,
    envelope: Arc<EnvelopeFn>,
}

impl FnIntegrand {
    pub fn new(
        f: impl Fn(&StatePoint<'_>, f64) -> f64 + Send + Sync + 'static,
        envelope: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            envelope: Arc::new(envelope),
        }
    }

    /// `c · 𝓛`, with the envelope scaled alike.
    pub fn scaled(inner: Arc<dyn CostIntegrand>, c: f64) -> Self {
        let env = inner.clone();
        Self::new(
            move |at, eta| c * inner.eval(at, eta),
            move |r, t| c.abs() * env.envelope(r, t),
        )
    }
}

impl CostIntegrand for FnIntegrand {
    fn eval(&self, at: &StatePoint<'_>, eta: f64) -> f64 {
        (self.f)(at, eta)
    }
    fn envelope(&self, r: f64, t: f64) -> f64 {
        (self.envelope)(r, t)
    }
}

/// The double-well integrand `(1 - η²)² + q‖y‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWell {
    pub state_weight: f64,
    /// `max_{η∈Λ} (1 - η²)²`.
    pub well_max: f64,
}

impl DoubleWell {
    pub fn new(state_weight: f64, grid: &ControlGrid) -> Self {
        let (lo, hi) = grid.bounds();
        let well = |e: f64| (1.0 - e * e).powi(2);
        let mut well_max = well(lo).max(well(hi));
        if lo <= 0.0 && hi >= 0.0 {
            well_max = well_max.max(1.0);
        }
        Self {
            state_weight,
            well_max,
        }
    }
}

impl CostIntegrand for DoubleWell {
    fn eval(&self, at: &StatePoint<'_>, eta: f64) -> f64 {
        (1.0 - eta * eta).powi(2) + self.state_weight * at.y.iter().map(|v| v * v).sum::<f64>()
    }
    fn envelope(&self, r: f64, _: f64) -> f64 {
        self.well_max + self.state_weight.abs() * r * r
    }
}

/// `∫_0^T Σ_j v_j(t) 𝓛(t, y(t), η_j) dt` along a solved trajectory.
///
/// Each mesh cell is integrated by Gauss-Legendre on the linear interpolant
/// of `y`, with the control read at the cell midpoint.
pub fn cost_along(
    traj: &Trajectory,
    grid: &ControlGrid,
    v: &RelaxedControl,
    integrand: &dyn CostIntegrand,
) -> Result<f64> {
    v.validate(grid)?;
    let mesh = traj.mesh();
    let k = traj.modes();
    let (xs, ws) = gauss_legendre(COST_POINTS);
    let nodes = mesh.nodes();
    let lambda = mesh.lambda();
    let mut y = vec![0.0; k];
    let mut total = 0.0;
    for (c, cell) in mesh.cells().iter().enumerate() {
        let (a, b) = (nodes[cell.left], nodes[cell.right]);
        let h = b.t - a.t;
        let weights = v.weights_at(mesh.cell_mid(c));
        let t_k = mesh.boundaries()[a.interval];
        let (ya, yb) = (traj.y(cell.left), traj.y(cell.right));
        let mut cell_sum = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            let s = 0.5 * (1.0 + x);
            let t = a.t + h * s;
            for m in 0..k {
                y[m] = (1.0 - s) * ya[m] + s * yb[m];
            }
            let at = StatePoint {
                t,
                interval: a.interval,
                weight: if lambda == 1.0 {
                    1.0
                } else {
                    (t - t_k).powf(1.0 - lambda)
                },
                y: &y,
            };
            let mut point = 0.0;
            for (j, &wj) in weights.iter().enumerate() {
                if wj > 0.0 {
                    point += wj * integrand.eval(&at, grid.atoms()[j]);
                }
            }
            cell_sum += w * point;
        }
        total += 0.5 * h * cell_sum;
    }
    Ok(total)
}

/// `𝓙(v)`: solves the relaxed system under `v`, then integrates the cost.
pub fn cost_relaxed(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    integrand: &dyn CostIntegrand,
    v: &RelaxedControl,
    spec: &MeshSpec,
) -> Result<f64> {
    let solver = Solver::new(problem, &spec.refined_by(v.breakpoints()))?;
    let traj = solver.solve(&relaxed_rhs(problem, grid, v)?)?;
    cost_along(&traj, grid, v, integrand)
}

/// `𝓙(u)`: the same computation on the Dirac embedding of `u`.
pub fn cost_ordinary(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    integrand: &dyn CostIntegrand,
    u: &OrdinaryControl,
    spec: &MeshSpec,
) -> Result<f64> {
    cost_relaxed(problem, grid, integrand, &embed_dirac(u, grid)?, spec)
}
