//! Picard iteration of the mild-solution operator on a fixed mesh.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::gamma;

use super::mesh::{Mesh, MeshSpec};
use super::problem::{SpectralProblem, StatePoint};
use super::propagator::Propagator;
use super::trajectory::Trajectory;

/// The forcing `s ↦ f(s, x(s))` seen by the solver.
///
/// `cell_mid` identifies the cell being integrated, so a right-hand side that
/// switches between cells (a piecewise-constant control) is evaluated with
/// the value belonging to that cell at both of its endpoints.
pub trait Rhs: Sync {
    fn eval(&self, cell_mid: f64, at: &StatePoint<'_>, out: &mut [f64]);
}

/// Right-hand side from a closure of the state point only.
pub struct FnRhs<F>(pub F);

impl<F> Rhs for FnRhs<F>
where
    F: Fn(&StatePoint<'_>, &mut [f64]) + Sync,
{
    fn eval(&self, _: f64, at: &StatePoint<'_>, out: &mut [f64]) {
        (self.0)(at, out)
    }
}

/// The problem's own nonlinearity at a fixed control value.
pub struct FixedControl<'a> {
    pub problem: &'a SpectralProblem,
    pub eta: f64,
}

impl Rhs for FixedControl<'_> {
    fn eval(&self, _: f64, at: &StatePoint<'_>, out: &mut [f64]) {
        self.problem.nonlinearity.eval(at, self.eta, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardOptions {
    /// Stop once both the weighted and the unweighted update fall below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Ratio above which a sweep counts toward divergence.
    pub divergence_ratio: f64,
    pub divergence_sweeps: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 200,
            divergence_ratio: 0.9,
            divergence_sweeps: 5,
        }
    }
}

/// Per-solve record of the iteration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    pub radius: f64,
    pub sweeps: usize,
    /// Weighted-norm size of each update `‖y^{j+1} - y^j‖_r`.
    pub updates: Vec<f64>,
    /// Unweighted size of each update.
    pub pc_updates: Vec<f64>,
    /// `updates[j] / updates[j-1]` since the last restart, recorded while both are above roundoff.
    pub ratios: Vec<f64>,
    /// Radius doublings forced by a sweep ratio above the certified bound.
    #[serde(default)]
    pub restarts: usize,
}

/// Largest sweep ratio a certified solve may record.
pub const CERTIFIED_RATIO: f64 = 0.5;
/// Radius doublings allowed inside one solve.
pub const MAX_RESTARTS: usize = 20;

impl PicardDiagnostics {
    /// Largest recorded ratio after the first sweep, or 0 when none was recorded.
    pub fn worst_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Printed radius together with the radius actually used and its measured factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub printed: f64,
    pub radius: f64,
    pub factor: f64,
    pub doublings: usize,
}

/// A problem bound to a mesh, ready to solve for many right-hand sides.
#[derive(Clone)]
pub struct Solver {
    problem: SpectralProblem,
    propagator: Arc<Propagator>,
    options: PicardOptions,
    radius: Option<RadiusReport>,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("nodes", &self.propagator.mesh().nodes().len())
            .field("options", &self.options)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl Solver {
    pub fn new(problem: &SpectralProblem, spec: &MeshSpec) -> Result<Self> {
        let mut spec = spec.clone();
        spec.breakpoints.retain(|&b| b > 0.0 && b < problem.horizon);
        let mesh = Mesh::build(&problem.boundaries(), problem.params.lambda(), &spec)?;
        Ok(Self::on_mesh(problem, mesh)?.with_options(spec.picard))
    }

    pub fn on_mesh(problem: &SpectralProblem, mesh: Mesh) -> Result<Self> {
        if mesh.boundaries() != problem.boundaries().as_slice() {
            return Err(domain(
                "Solver",
                "mesh boundaries differ from the impulse schedule",
            ));
        }
        let propagator = Propagator::new(mesh, &problem.params, &problem.gen)?;
        Ok(Self {
            problem: problem.clone(),
            propagator: Arc::new(propagator),
            options: PicardOptions::default(),
            radius: None,
        })
    }

    pub fn with_options(mut self, options: PicardOptions) -> Self {
        self.options = options;
        self
    }

    /// Reuses a propagator for a problem differing only in data (`x₀`, `g`, jump maps).
    pub fn rebind(&self, problem: &SpectralProblem) -> Result<Self> {
        if problem.boundaries() != self.problem.boundaries()
            || problem.params != self.problem.params
            || problem.gen != self.problem.gen
        {
            return Err(domain(
                "Solver::rebind",
                "problem differs in mesh-defining data",
            ));
        }
        Ok(Self {
            problem: problem.clone(),
            propagator: self.propagator.clone(),
            options: self.options,
            radius: None,
        })
    }

    pub fn problem(&self) -> &SpectralProblem {
        &self.problem
    }

    pub fn mesh(&self) -> &Mesh {
        self.propagator.mesh()
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn options(&self) -> PicardOptions {
        self.options
    }

    /// Fixes the weighted-norm radius used by later solves.
    pub fn with_radius(mut self, report: RadiusReport) -> Self {
        self.radius = Some(report);
        self
    }

    pub fn radius(&self) -> Option<RadiusReport> {
        self.radius
    }

    /// The radius formula evaluated over `k = 1..n+1`, with `h_{n+1} = 0`.
    pub fn printed_radius(&self) -> Result<f64> {
        let p = &self.problem;
        let (mu, lambda) = (p.params.mu(), p.params.lambda());
        let m = p.gen.semigroup_bound();
        let g = gamma(lambda)?;
        let l = p.nonlinearity.lipschitz();
        let t = p.horizon;
        let mut best = 0.0f64;
        let mut sum = 0.0;
        let mut prev = 0.0;
        let times = p.impulses.times();
        let hs: Vec<f64> = p.impulses.impulses().iter().map(|i| i.lipschitz).collect();
        for k in 0..=times.len() {
            if k < times.len() {
                sum += hs[k] * (times[k] - prev).powf(lambda - 1.0);
                prev = times[k];
            }
            let bracket = g - 2.0 * m * sum;
            if bracket <= 0.0 {
                return Err(Error::Hypothesis {
                    clause: "H(h)".into(),
                    detail: "radius bracket is not positive".into(),
                });
            }
            let r = 2.0 * g * m * l * t.powf(1.0 - lambda) * bracket.powf(1.0 / mu);
            best = best.max(r);
        }
        Ok(best)
    }

    /// Starts from the printed radius (or 1 when it vanishes) and doubles it
    /// until one sweep of the operator contracts every probe pair by ≤ 1/2.
    pub fn contraction_radius(&self, rhs: &dyn Rhs) -> Result<RadiusReport> {
        let printed = self.printed_radius()?;
        let mut r = if printed > 0.0 { printed } else { 1.0 };
        let probes = self.probe_pairs();
        let mut factor = self.probe_factor(rhs, &probes, r);
        let mut doublings = 0;
        while factor > CERTIFIED_RATIO {
            if doublings == 20 {
                return Err(Error::NonContractive { doublings, factor });
            }
            r *= 2.0;
            doublings += 1;
            factor = self.probe_factor(rhs, &probes, r);
        }
        Ok(RadiusReport {
            printed,
            radius: r,
            factor,
            doublings,
        })
    }

    /// Largest ratio `‖𝒢y₁ - 𝒢y₂‖_r / ‖y₁ - y₂‖_r` over the probe set.
    pub fn probe_factor(&self, rhs: &dyn Rhs, probes: &[(Vec<f64>, Vec<f64>)], r: f64) -> f64 {
        let mut ws = Workspace::new(&self.propagator);
        let mesh = self.mesh();
        let mut worst = 0.0f64;
        for (a, b) in probes {
            let ga = self.apply(rhs, a, &mut ws);
            let gb = self.apply(rhs, b, &mut ws);
            let num = log_weighted_diff(mesh, &ga, &gb, r, self.propagator.modes(), 0.0);
            let den = log_weighted_diff(mesh, a, b, r, self.propagator.modes(), 0.0);
            if den.is_finite() {
                worst = worst.max((num - den).exp());
            }
        }
        worst
    }

    /// Probe pairs around the initial iterate: a perturbation flat in the
    /// weighted norm, a constant one, a late bump, and the iterate against zero.
    pub fn probe_pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let base = self.initial_iterate();
        let k = self.propagator.modes();
        let mesh = self.mesh();
        let scale = base.iter().fold(1e-3f64, |m, v| m.max(v.abs()));
        let dir: Vec<f64> = (0..k)
            .map(|m| if m % 2 == 0 { 1.0 } else { -0.5 } / (m as f64 + 1.0))
            .collect();
        let norm = crate::operators::norm(&dir);
        let horizon = mesh.horizon();
        let mut pairs = Vec::new();
        for shape in 0..3 {
            let mut other = base.clone();
            for (n, node) in mesh.nodes().iter().enumerate() {
                let amp = match shape {
                    0 => 0.1,
                    1 => 0.1 * (node.t / horizon),
                    _ => 0.1 * (-(node.t - horizon).powi(2) * 50.0).exp(),
                };
                for m in 0..k {
                    other[n * k + m] += scale * amp * dir[m] / norm;
                }
            }
            pairs.push((base.clone(), other));
        }
        pairs.push((base.clone(), vec![0.0; base.len()]));
        pairs
    }

    /// `S(t)x₀` carried through the impulses with `g ≡ 0`.
    pub fn initial_iterate(&self) -> Vec<f64> {
        let prop = &self.propagator;
        let mesh = prop.mesh();
        let k = prop.modes();
        let mut y = vec![0.0; mesh.nodes().len() * k];
        let mut phis: Vec<Vec<f64>> = Vec::new();
        for interval in 0..mesh.interval_count() {
            if interval > 0 {
                let left = mesh.interval_range(interval - 1).end - 1;
                phis.push(self.jump(interval - 1, &y, left));
            }
            for n in mesh.interval_range(interval) {
                prop.free_part(n, &self.problem.x0, &phis, &mut y[n * k..(n + 1) * k]);
            }
        }
        y
    }

    fn jump(&self, i: usize, y: &[f64], left: usize) -> Vec<f64> {
        let k = self.propagator.modes();
        let node = self.mesh().nodes()[left];
        let x_left: Vec<f64> = y[left * k..(left + 1) * k]
            .iter()
            .map(|v| v / node.weight)
            .collect();
        let mut out = vec![0.0; k];
        self.problem.impulses.impulses()[i]
            .map
            .apply(&x_left, &mut out);
        out
    }

    /// One application of the Picard operator.
    pub fn apply(&self, rhs: &dyn Rhs, y: &[f64], ws: &mut Workspace) -> Vec<f64> {
        let prop = &self.propagator;
        let mesh = prop.mesh();
        let k = prop.modes();
        let nodes = mesh.nodes();
        let phis: Vec<Vec<f64>> = (1..mesh.interval_count())
            .map(|i| self.jump(i - 1, y, mesh.interval_range(i - 1).end - 1))
            .collect();
        for (c, cell) in mesh.cells().iter().enumerate() {
            let mid = mesh.cell_mid(c);
            for (side, idx) in [(0, cell.left), (1, cell.right)] {
                let node = nodes[idx];
                let at = StatePoint {
                    t: node.t,
                    interval: node.interval,
                    weight: node.weight,
                    y: &y[idx * k..(idx + 1) * k],
                };
                let buf = if side == 0 {
                    &mut ws.g_left
                } else {
                    &mut ws.g_right
                };
                rhs.eval(mid, &at, &mut buf[c * k..(c + 1) * k]);
            }
        }
        let mut out = vec![0.0; y.len()];
        for n in 0..nodes.len() {
            let row = &mut out[n * k..(n + 1) * k];
            let phis_here = &phis[..nodes[n].interval];
            prop.free_part(n, &self.problem.x0, phis_here, row);
            prop.add_forcing(n, &ws.g_left, &ws.g_right, row);
        }
        out
    }

    /// Iterates to the fixed point, certifying contraction along the way.
    pub fn solve(&self, rhs: &dyn Rhs) -> Result<Trajectory> {
        let radius = match self.radius {
            Some(r) => r,
            None => self.contraction_radius(rhs)?,
        };
        self.iterate(rhs, self.initial_iterate(), radius)
    }

    /// Iterates from a caller-supplied first iterate.
    pub fn solve_from(&self, rhs: &dyn Rhs, start: Vec<f64>) -> Result<Trajectory> {
        let radius = match self.radius {
            Some(r) => r,
            None => self.contraction_radius(rhs)?,
        };
        if start.len() != self.initial_iterate().len() {
            return Err(domain(
                "Solver::solve_from",
                "start iterate has the wrong length",
            ));
        }
        self.iterate(rhs, start, radius)
    }

    fn iterate(&self, rhs: &dyn Rhs, mut y: Vec<f64>, radius: RadiusReport) -> Result<Trajectory> {
        let opts = self.options;
        let mesh = self.mesh();
        let k = self.propagator.modes();
        let mut ws = Workspace::new(&self.propagator);
        let mut diag = PicardDiagnostics {
            radius: radius.radius,
            ..Default::default()
        };
        let mut above = 0;
        let mut log_prev_signal: Option<f64> = None;
        for sweep in 1..=opts.max_sweeps {
            let next = self.apply(rhs, &y, &mut ws);
            let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if !scale.is_finite() {
                return Err(Error::Overflow { op: "picard_solve" });
            }
            let log_upd = log_weighted_diff(mesh, &next, &y, diag.radius, k, 0.0);
            let upd = log_upd.exp();
            let pc = log_weighted_diff(mesh, &next, &y, 0.0, k, 0.0).exp();
            // nodes whose change is at roundoff level carry no contraction information
            let floor = 1e-13 * scale;
            let log_signal = log_weighted_diff(mesh, &next, &y, diag.radius, k, floor);
            diag.updates.push(upd);
            diag.pc_updates.push(pc);
            diag.sweeps = sweep;
            if let Some(prev) = log_prev_signal {
                if log_signal.is_finite() && f64::is_finite(prev) {
                    let ratio = (log_signal - prev).exp();
                    if ratio > CERTIFIED_RATIO && diag.restarts < MAX_RESTARTS {
                        // the probe set missed this direction: a larger radius
                        // weights late times less, and the certificate restarts
                        diag.radius *= 2.0;
                        diag.restarts += 1;
                        diag.ratios.clear();
                        log_prev_signal = None;
                        above = 0;
                        y = next;
                        continue;
                    }
                    diag.ratios.push(ratio);
                    if ratio > opts.divergence_ratio {
                        above += 1;
                        if above >= opts.divergence_sweeps {
                            return Err(Error::Divergence {
                                threshold: opts.divergence_ratio,
                                sweeps: above,
                                last_ratio: ratio,
                            });
                        }
                    } else {
                        above = 0;
                    }
                }
            }
            log_prev_signal = Some(log_signal);
            y = next;
            if upd < opts.tol && pc < opts.tol {
                return Trajectory::new(self.mesh().clone(), k, y, diag);
            }
        }
        Err(Error::Stalled {
            sweeps: opts.max_sweeps,
            last_update: diag.pc_updates.last().copied().unwrap_or(f64::NAN),
        })
    }
}

/// Scratch buffers for per-cell forcing values.
#[derive(Debug, Clone)]
pub struct Workspace {
    g_left: Vec<f64>,
    g_right: Vec<f64>,
}

impl Workspace {
    pub fn new(prop: &Propagator) -> Self {
        let len = prop.mesh().cells().len() * prop.modes();
        Self {
            g_left: vec![0.0; len],
            g_right: vec![0.0; len],
        }
    }
}

/// `ln max_n ‖a_n - b_n‖ e^{-r t_n}` over nodes whose difference exceeds
/// `floor`, computed in log space so large `r` cannot underflow.
pub(crate) fn log_weighted_diff(
    mesh: &Mesh,
    a: &[f64],
    b: &[f64],
    r: f64,
    k: usize,
    floor: f64,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (n, node) in mesh.nodes().iter().enumerate() {
        let d: f64 = (0..k)
            .map(|m| (a[n * k + m] - b[n * k + m]).powi(2))
            .sum::<f64>()
            .sqrt();
        if d > floor && d > 0.0 {
            best = best.max(d.ln() - r * node.t);
        }
    }
    best
}

/// Builds the mesh from `spec`, certifies a radius for `rhs` and solves.
pub fn picard_solve(
    problem: &SpectralProblem,
    rhs: &dyn Rhs,
    spec: &MeshSpec,
) -> Result<Trajectory> {
    Solver::new(problem, spec)?.solve(rhs)
}
