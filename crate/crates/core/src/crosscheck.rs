//! Independent integrators for the two classical reductions, used to
//! cross-check the mild-solution solver.
//!
//! With `ν = 1` the mild solution is the solution of the Caputo system
//! `x(t) = x₀ + Σ_{t_k<t} φ_k + I^μ[A x + g](t)`, memory running across the
//! impulses. [`caputo_predictor_corrector`] integrates that Volterra form
//! directly on a graded grid with product-trapezoid weights, never touching
//! a Mittag-Leffler function. With `μ = ν = 1` it is an ordinary differential
//! equation with jumps, integrated by classical RK4 in [`rk4_impulsive`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mild::{Rhs, SpectralProblem, StatePoint, Trajectory};
use crate::specfun::gamma;

/// States on a grid of times, with both one-sided limits.
///
/// `left[n]` and `right[n]` differ only at impulse times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub times: Vec<f64>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
}

impl GridSolution {
    /// Largest Euclidean distance to `traj` over the trajectory's mesh nodes.
    ///
    /// Needs `λ = 1` (so `y = x`) and every node on the grid; the first node of
    /// an interval after an impulse is compared with the right limit.
    pub fn distance_to(&self, traj: &Trajectory) -> Result<f64> {
        let mesh = traj.mesh();
        if mesh.lambda() != 1.0 {
            return Err(domain("GridSolution::distance_to", "needs λ = 1"));
        }
        let mut worst = 0.0f64;
        for k in 0..mesh.interval_count() {
            let range = mesh.interval_range(k);
            for n in range.clone() {
                let t = mesh.nodes()[n].t;
                let i = self.index_of(t).ok_or_else(|| {
                    domain(
                        "GridSolution::distance_to",
                        format!("node {t} is off the grid"),
                    )
                })?;
                let at_jump = n == range.start && k > 0;
                let reference = if at_jump {
                    &self.right[i]
                } else {
                    &self.left[i]
                };
                let d = traj
                    .y(n)
                    .iter()
                    .zip(reference)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// Grid index of `t`, if `t` is a grid time.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * (1.0 + t.abs());
        let i = self.times.partition_point(|&s| s < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }
}

/// Grid on `[0, T]`: `steps` cells per impulse interval, graded toward each
/// interval's left end as `t_k + h (j/steps)^grading`.
fn graded_grid(problem: &SpectralProblem, steps: usize, grading: f64) -> (Vec<f64>, Vec<usize>) {
    let bounds = problem.boundaries();
    let mut times = vec![bounds[0]];
    let mut jumps = Vec::new();
    for (k, w) in bounds.windows(2).enumerate() {
        if k > 0 {
            jumps.push(times.len() - 1);
        }
        for j in 1..=steps {
            times.push(w[0] + (w[1] - w[0]) * (j as f64 / steps as f64).powf(grading));
        }
    }
    (times, jumps)
}

/// Evaluates `A x + g` for the cell whose midpoint is `mid`.
fn field(
    problem: &SpectralProblem,
    rhs: &dyn Rhs,
    mid: f64,
    t: f64,
    interval: usize,
    x: &[f64],
    out: &mut [f64],
) {
    let at = StatePoint {
        t,
        interval,
        weight: 1.0,
        y: x,
    };
    rhs.eval(mid, &at, out);
    for ((o, a), xi) in out.iter_mut().zip(problem.gen.eigenvalues()).zip(x) {
        *o += a * xi;
    }
}

/// Product-trapezoid weights of `∫_a^b (t - s)^{μ-1} f(s) ds` for `f` linear
/// between its values at `a` and `b`, returned as `(left, right)`.
fn trapezoid_weights(mu: f64, t: f64, a: f64, b: f64) -> (f64, f64) {
    let (da, db) = (t - a, t - b);
    let i0 = (da.powf(mu) - db.powf(mu)) / mu;
    let i1 = da * i0 - (da.powf(mu + 1.0) - db.powf(mu + 1.0)) / (mu + 1.0);
    let right = i1 / (b - a);
    (i0 - right, right)
}

/// Adams predictor-corrector for the `ν = 1` system, `steps` cells per
/// impulse interval graded with exponent `grading`.
///
/// The linear part is taken implicitly in both stages, so stiff high modes
/// stay stable; the predictor freezes `g` at its last value and the corrector
/// re-evaluates it at the prediction.
pub fn caputo_predictor_corrector(
    problem: &SpectralProblem,
    rhs: &dyn Rhs,
    steps: usize,
    grading: f64,
) -> Result<GridSolution> {
    const OP: &str = "caputo_predictor_corrector";
    if problem.params.nu() != 1.0 {
        return Err(domain(OP, "the Caputo reduction needs ν = 1"));
    }
    if steps == 0 || !(grading >= 1.0) {
        return Err(domain(OP, "need at least one step and grading ≥ 1"));
    }
    let mu = problem.params.mu();
    let k = problem.modes();
    let (times, jumps) = graded_grid(problem, steps, grading);
    let rg = 1.0 / gamma(mu)?;
    let eig = problem.gen.eigenvalues();

    let mut left = vec![problem.x0.clone()];
    let mut right = vec![problem.x0.clone()];
    // f⁺ at the left end of each cell and f⁻ at its right end
    let mut f_cell_left: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let mut f_cell_right: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let mut base = problem.x0.clone();
    let mut interval = 0;
    let mut buf = vec![0.0; k];

    for n in 1..times.len() {
        let (t0, t) = (times[n - 1], times[n]);
        let mid = 0.5 * (t0 + t);
        field(problem, rhs, mid, t0, interval, &right[n - 1], &mut buf);
        let g_frozen: Vec<f64> = (0..k).map(|m| buf[m] - eig[m] * right[n - 1][m]).collect();
        f_cell_left.push(buf.clone());
        // history: every term except the implicit right end of the newest cell
        let mut hist = base.clone();
        let mut r1 = 0.0;
        for j in 0..n {
            let (wl, wr) = trapezoid_weights(mu, t, times[j], times[j + 1]);
            let fl = &f_cell_left[j];
            for m in 0..k {
                hist[m] += rg * wl * fl[m];
            }
            if j + 1 < n {
                let fr = &f_cell_right[j];
                for m in 0..k {
                    hist[m] += rg * wr * fr[m];
                }
            } else {
                r1 = rg * wr;
            }
        }
        let solve = |g: &[f64]| -> Vec<f64> {
            (0..k)
                .map(|m| (hist[m] + r1 * g[m]) / (1.0 - r1 * eig[m]))
                .collect()
        };
        let predicted = solve(&g_frozen);
        field(problem, rhs, mid, t, interval, &predicted, &mut buf);
        let g_pred: Vec<f64> = (0..k).map(|m| buf[m] - eig[m] * predicted[m]).collect();
        let x_left = solve(&g_pred);
        field(problem, rhs, mid, t, interval, &x_left, &mut buf);
        f_cell_right.push(buf.clone());

        let mut x_right = x_left.clone();
        if jumps.contains(&n) {
            let mut phi = vec![0.0; k];
            problem.impulses.impulses()[interval]
                .map
                .apply(&x_left, &mut phi);
            for m in 0..k {
                x_right[m] += phi[m];
                base[m] += phi[m];
            }
            interval += 1;
        }
        left.push(x_left);
        right.push(x_right);
    }
    Ok(GridSolution { times, left, right })
}

/// Classical RK4 for the `μ = ν = 1` system on `steps` uniform cells per
/// impulse interval, jumping by `φ_k` at each impulse.
pub fn rk4_impulsive(
    problem: &SpectralProblem,
    rhs: &dyn Rhs,
    steps: usize,
) -> Result<GridSolution> {
    const OP: &str = "rk4_impulsive";
    if problem.params.mu() != 1.0 || problem.params.nu() != 1.0 {
        return Err(domain(OP, "the classical reduction needs μ = ν = 1"));
    }
    if steps == 0 {
        return Err(domain(OP, "need at least one step"));
    }
    let k = problem.modes();
    let (times, jumps) = graded_grid(problem, steps, 1.0);
    let mut left = vec![problem.x0.clone()];
    let mut right = vec![problem.x0.clone()];
    let mut interval = 0;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    for n in 1..times.len() {
        let (t0, h) = (times[n - 1], times[n] - times[n - 1]);
        let mid = t0 + 0.5 * h;
        let x = &right[n - 1];
        let shifted = |kk: &[f64], c: f64| -> Vec<f64> {
            x.iter().zip(kk).map(|(a, b)| a + c * h * b).collect()
        };
        field(problem, rhs, mid, t0, interval, x, &mut k1);
        field(
            problem,
            rhs,
            mid,
            mid,
            interval,
            &shifted(&k1, 0.5),
            &mut k2,
        );
        field(
            problem,
            rhs,
            mid,
            mid,
            interval,
            &shifted(&k2, 0.5),
            &mut k3,
        );
        field(
            problem,
            rhs,
            mid,
            times[n],
            interval,
            &shifted(&k3, 1.0),
            &mut k4,
        );
        let x_left: Vec<f64> = (0..k)
            .map(|m| x[m] + h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]))
            .collect();
        let mut x_right = x_left.clone();
        if jumps.contains(&n) {
            let mut phi = vec![0.0; k];
            problem.impulses.impulses()[interval]
                .map
                .apply(&x_left, &mut phi);
            for m in 0..k {
                x_right[m] += phi[m];
            }
            interval += 1;
        }
        left.push(x_left);
        right.push(x_right);
    }
    Ok(GridSolution { times, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_integrate_constants_and_linears() {
        for mu in [0.3, 0.7, 1.0] {
            let grid: Vec<f64> = (0..=9).map(|j| (j as f64 / 9.0).powi(2)).collect();
            let t = 1.0;
            let (mut c, mut lin) = (0.0, 0.0);
            for w in grid.windows(2) {
                let (wl, wr) = trapezoid_weights(mu, t, w[0], w[1]);
                c += wl + wr;
                lin += wl * w[0] + wr * w[1];
            }
            assert!((c - 1.0 / mu).abs() < 1e-12);
            // ∫₀¹ (1-s)^{μ-1} s ds = 1/(μ(μ+1))
            assert!((lin - 1.0 / (mu * (mu + 1.0))).abs() < 1e-12);
        }
    }
}
