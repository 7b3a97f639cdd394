use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mild::{MeshSpec, Nonlinearity, Rhs, Solver, SpectralProblem, StatePoint, Trajectory};

use super::chattering::{chattering_approximate, weak_star_gap, TestFamily};
use super::controls::{embed_dirac, ControlGrid, OrdinaryControl, RelaxedControl};

/// The relaxed vector field `G(t, x)v = Σ_j v_j(t) g(t, x, η_j)`.
///
/// A `g` declaring itself affine in `η` is evaluated once at the mean control.
/// The control is read at the cell midpoint, so a cell never straddles a
/// switch as long as the mesh contains the control breakpoints.
pub struct RelaxedRhs<'a> {
    g: &'a dyn Nonlinearity,
    atoms: &'a [f64],
    control: &'a RelaxedControl,
}

impl Rhs for RelaxedRhs<'_> {
    fn eval(&self, cell_mid: f64, at: &StatePoint<'_>, out: &mut [f64]) {
        if !self.g.uses_control() {
            self.g.eval(at, self.atoms[0], out);
            return;
        }
        let weights = self.control.weights_at(cell_mid);
        if self.g.control_affine() {
            let mean = weights
                .iter()
                .zip(self.atoms)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, a)| w * a)
                .sum();
            self.g.eval(at, mean, out);
            return;
        }
        let mut active = weights.iter().enumerate().filter(|(_, &w)| w > 0.0);
        let (j0, &w0) = active
            .next()
            .expect("a probability row has a positive weight");
        self.g.eval(at, self.atoms[j0], out);
        if w0 != 1.0 {
            out.iter_mut().for_each(|o| *o *= w0);
        }
        let mut buf = vec![0.0; out.len()];
        for (j, &w) in active {
            self.g.eval(at, self.atoms[j], &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += w * b;
            }
        }
    }
}

/// `G(·,·)v` for the problem's nonlinearity.
pub fn relaxed_rhs<'a>(
    problem: &'a SpectralProblem,
    grid: &'a ControlGrid,
    v: &'a RelaxedControl,
) -> Result<RelaxedRhs<'a>> {
    v.validate(grid)?;
    Ok(RelaxedRhs {
        g: problem.nonlinearity.as_ref(),
        atoms: grid.atoms(),
        control: v,
    })
}

/// A solver whose mesh contains every listed control breakpoint.
pub fn control_solver(
    problem: &SpectralProblem,
    spec: &MeshSpec,
    breakpoints: &[f64],
) -> Result<Solver> {
    Solver::new(problem, &spec.refined_by(breakpoints))
}

/// The relaxed system under `v`.
pub fn solve_relaxed(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    v: &RelaxedControl,
    spec: &MeshSpec,
) -> Result<Trajectory> {
    let solver = control_solver(problem, spec, v.breakpoints())?;
    solver.solve(&relaxed_rhs(problem, grid, v)?)
}

/// The ordinary system under `u`, through its Dirac embedding.
pub fn solve_ordinary(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    u: &OrdinaryControl,
    spec: &MeshSpec,
) -> Result<Trajectory> {
    solve_relaxed(problem, grid, &embed_dirac(u, grid)?, spec)
}

/// One point of a chattering convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub n_cells: usize,
    /// `‖x(·, v) - x(·, u_N)‖` in the piecewise-continuous weighted norm.
    pub pc_gap: f64,
    /// Weak* distance between `v` and `δ_{u_N}` under the default test family.
    pub weak_star_gap: f64,
    /// `‖x(·, v)‖` on the same mesh.
    pub relaxed_norm: f64,
}

/// Relaxed versus chattered trajectories for each `n_cells`, both solved on
/// the mesh refined by the chattered switch times.
pub fn trajectory_gap(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    v: &RelaxedControl,
    n_cells: &[usize],
    spec: &MeshSpec,
) -> Result<Vec<GapPoint>> {
    v.validate(grid)?;
    let required = problem.impulses.times();
    let family = TestFamily::default();
    n_cells
        .iter()
        .map(|&n| {
            let u = chattering_approximate(v, n, &required)?;
            let dirac = embed_dirac(&u, grid)?;
            let solver = control_solver(problem, spec, u.breakpoints())?;
            let relaxed = solver.solve(&relaxed_rhs(problem, grid, v)?)?;
            let chattered = solver.solve(&relaxed_rhs(problem, grid, &dirac)?)?;
            Ok(GapPoint {
                n_cells: n,
                pc_gap: relaxed.pc_distance(&chattered)?,
                weak_star_gap: weak_star_gap(grid, v, &dirac, &family)?,
                relaxed_norm: relaxed.pc_norm(),
            })
        })
        .collect()
}
