use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mild::{MeshSpec, Solver, SpectralProblem};
use crate::relax::{
    relaxed_rhs, uniform_breakpoints, ControlGrid, OrdinaryControl, RelaxedControl,
};

use super::cost::{cost_along, CostIntegrand};

/// How controls are searched: `P` equal pieces, an evaluation budget and seeded multi-starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpec {
    pub pieces: usize,
    /// Enumeration is exhaustive when `atoms^P` fits; otherwise a cap on evaluations per search.
    pub budget: usize,
    pub starts: usize,
    pub seed: u64,
    pub max_passes: usize,
    /// Smallest mass moved between atoms by the relaxed pattern search.
    pub min_step: f64,
    /// Cells of the chattering realization of the relaxed minimizer.
    pub n_cells: usize,
    /// Slack in `m_r ≤ m_o + tol`.
    pub tol: f64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            pieces: 8,
            budget: 20_000,
            starts: 8,
            seed: 20_240_617,
            max_passes: 20,
            min_step: 1.0 / 256.0,
            n_cells: 128,
            tol: 1e-8,
        }
    }
}

impl SearchSpec {
    /// Seeds of the ordinary multi-starts, in order.
    pub fn start_seeds(&self) -> Vec<u64> {
        (0..self.starts as u64)
            .map(|s| self.seed.wrapping_add(s))
            .collect()
    }
}

/// Cost evaluations for controls sharing one set of breakpoints: the mesh,
/// propagator and contraction radius are built once.
pub struct Evaluator<'a> {
    problem: &'a SpectralProblem,
    grid: &'a ControlGrid,
    integrand: &'a dyn CostIntegrand,
    solver: Solver,
    breakpoints: Vec<f64>,
    evaluations: AtomicUsize,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        problem: &'a SpectralProblem,
        grid: &'a ControlGrid,
        integrand: &'a dyn CostIntegrand,
        spec: &MeshSpec,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        let solver = Solver::new(problem, &spec.refined_by(&breakpoints))?;
        let pieces = breakpoints.len() - 1;
        let reference = RelaxedControl::new(
            breakpoints.clone(),
            vec![vec![1.0 / grid.len() as f64; grid.len()]; pieces],
        )
        .or_else(|_| {
            let mut row = vec![0.0; grid.len()];
            row[0] = 1.0;
            RelaxedControl::new(breakpoints.clone(), vec![row; pieces])
        })?;
        let radius = solver.contraction_radius(&relaxed_rhs(problem, grid, &reference)?)?;
        Ok(Self {
            problem,
            grid,
            integrand,
            solver: solver.with_radius(radius),
            breakpoints,
            evaluations: AtomicUsize::new(0),
        })
    }

    /// `P` equal pieces on `[0, T]`.
    pub fn uniform(
        problem: &'a SpectralProblem,
        grid: &'a ControlGrid,
        integrand: &'a dyn CostIntegrand,
        spec: &MeshSpec,
        pieces: usize,
    ) -> Result<Self> {
        Self::new(
            problem,
            grid,
            integrand,
            spec,
            uniform_breakpoints(problem.horizon, pieces),
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(AtomicOrdering::Relaxed)
    }

    pub fn relaxed(&self, v: &RelaxedControl) -> Result<f64> {
        if v.breakpoints() != self.breakpoints.as_slice() {
            return Err(Error::Control(
                "control breakpoints differ from the evaluator's".into(),
            ));
        }
        self.evaluations.fetch_add(1, AtomicOrdering::Relaxed);
        let traj = self
            .solver
            .solve(&relaxed_rhs(self.problem, self.grid, v)?)?;
        cost_along(&traj, self.grid, v, self.integrand)
    }

    pub fn relaxed_weights(&self, weights: Vec<Vec<f64>>) -> Result<f64> {
        self.relaxed(&RelaxedControl::new(self.breakpoints.clone(), weights)?)
    }

    pub fn ordinary(&self, atoms: &[usize]) -> Result<f64> {
        self.relaxed_weights(one_hot(atoms, self.grid.len()))
    }
}

fn one_hot(atoms: &[usize], m: usize) -> Vec<Vec<f64>> {
    atoms
        .iter()
        .map(|&a| {
            let mut row = vec![0.0; m];
            row[a] = 1.0;
            row
        })
        .collect()
}

/// Deterministic order on candidates: cost first, then the control encoding.
fn by_cost_then<T: PartialOrd>(a: &(f64, T), b: &(f64, T)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
}

fn best_of<T: PartialOrd + Send>(a: (f64, T), b: (f64, T)) -> (f64, T) {
    if by_cost_then(&b, &a) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Outcome of the ordinary search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinarySearch {
    pub m_o: f64,
    pub argmin: OrdinaryControl,
    /// The minimum is exact over `P`-piece controls (exhaustive enumeration).
    pub certified: bool,
    /// Every descent start stopped at a coordinate-wise minimum within budget.
    pub converged: bool,
    pub evaluations: usize,
    pub seeds: Vec<u64>,
}

/// `m_o` over `P`-piece ordinary controls.
pub fn minimize_ordinary(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    integrand: &dyn CostIntegrand,
    spec: &MeshSpec,
    search: &SearchSpec,
) -> Result<OrdinarySearch> {
    let eval = Evaluator::uniform(problem, grid, integrand, spec, search.pieces)?;
    minimize_ordinary_with(&eval, search)
}

pub fn minimize_ordinary_with(eval: &Evaluator<'_>, search: &SearchSpec) -> Result<OrdinarySearch> {
    let m = eval.grid.len();
    let p = eval.breakpoints.len() - 1;
    let total = (m as u64)
        .checked_pow(p as u32)
        .filter(|&n| n <= search.budget as u64);
    let (cost, atoms, certified, converged, seeds) = if let Some(total) = total {
        let best = (0..total)
            .into_par_iter()
            .map(|code| {
                let atoms = decode(code, m, p);
                Ok((eval.ordinary(&atoms)?, atoms))
            })
            .try_reduce_with(|a, b| Ok(best_of(a, b)))
            .expect("at least one control")?;
        (best.0, best.1, true, true, Vec::new())
    } else {
        let seeds = search.start_seeds();
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut converged = true;
        for &seed in &seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start: Vec<usize> = (0..p).map(|_| rng.random_range(0..m)).collect();
            let (c, a, ok) = coordinate_descent(eval, start, search)?;
            converged &= ok;
            best = Some(match best {
                None => (c, a),
                Some(b) => best_of(b, (c, a)),
            });
        }
        let (c, a) = best.expect("at least one start");
        (c, a, false, converged, seeds)
    };
    Ok(OrdinarySearch {
        m_o: cost,
        argmin: OrdinaryControl::new(eval.breakpoints.clone(), atoms)?,
        certified,
        converged,
        evaluations: eval.evaluations(),
        seeds,
    })
}

fn decode(mut code: u64, m: usize, p: usize) -> Vec<usize> {
    let mut atoms = vec![0; p];
    for slot in atoms.iter_mut().rev() {
        *slot = (code % m as u64) as usize;
        code /= m as u64;
    }
    atoms
}

/// Piece-by-piece exact minimization over the atom of that piece.
fn coordinate_descent(
    eval: &Evaluator<'_>,
    start: Vec<usize>,
    search: &SearchSpec,
) -> Result<(f64, Vec<usize>, bool)> {
    let m = eval.grid.len();
    let mut cur = (eval.ordinary(&start)?, start);
    for _ in 0..search.max_passes {
        let mut improved = false;
        for i in 0..cur.1.len() {
            if eval.evaluations() >= search.budget {
                return Ok((cur.0, cur.1, false));
            }
            let cand = (0..m)
                .into_par_iter()
                .filter(|&j| j != cur.1[i])
                .map(|j| {
                    let mut a = cur.1.clone();
                    a[i] = j;
                    Ok((eval.ordinary(&a)?, a))
                })
                .try_reduce_with(|a, b| Ok(best_of(a, b)));
            if let Some(c) = cand {
                let c = c?;
                if c.0 < cur.0 {
                    cur = c;
                    improved = true;
                }
            }
        }
        if !improved {
            return Ok((cur.0, cur.1, true));
        }
    }
    Ok((cur.0, cur.1, false))
}

/// Outcome of the relaxed search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSearch {
    pub m_r: f64,
    pub argmin: RelaxedControl,
    pub evaluations: usize,
    pub starts: usize,
}

/// `m_r` over `P`-piece relaxed controls: pattern search on the product of
/// simplices, moving dyadic masses between atoms, from the uniform measure,
/// the two-endpoint mixture, and any `warm` controls on the same pieces.
pub fn minimize_relaxed(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    integrand: &dyn CostIntegrand,
    spec: &MeshSpec,
    search: &SearchSpec,
    warm: &[RelaxedControl],
) -> Result<RelaxedSearch> {
    let eval = Evaluator::uniform(problem, grid, integrand, spec, search.pieces)?;
    minimize_relaxed_with(&eval, search, warm)
}

pub fn minimize_relaxed_with(
    eval: &Evaluator<'_>,
    search: &SearchSpec,
    warm: &[RelaxedControl],
) -> Result<RelaxedSearch> {
    let m = eval.grid.len();
    let p = eval.breakpoints.len() - 1;
    let mut starts: Vec<Vec<Vec<f64>>> = warm
        .iter()
        .filter(|w| w.breakpoints() == eval.breakpoints.as_slice() && w.atom_count() == m)
        .map(|w| w.weights().to_vec())
        .collect();
    starts.push(vec![vec![1.0 / m as f64; m]; p]);
    let mut ends = vec![0.0; m];
    ends[0] = 0.5;
    ends[m - 1] = 0.5;
    starts.push(vec![ends; p]);
    let n_starts = starts.len();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for start in starts {
        let found = pattern_search(eval, start, search)?;
        best = Some(match best {
            None => found,
            Some(b) => best_of_weights(b, found),
        });
    }
    let (cost, weights) = best.expect("at least one start");
    Ok(RelaxedSearch {
        m_r: cost,
        argmin: RelaxedControl::new(eval.breakpoints.clone(), weights)?,
        evaluations: eval.evaluations(),
        starts: n_starts,
    })
}

fn weights_cmp(a: &[Vec<f64>], b: &[Vec<f64>]) -> Ordering {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn best_of_weights(a: (f64, Vec<Vec<f64>>), b: (f64, Vec<Vec<f64>>)) -> (f64, Vec<Vec<f64>>) {
    match a.0.total_cmp(&b.0).then_with(|| weights_cmp(&a.1, &b.1)) {
        Ordering::Greater => b,
        _ => a,
    }
}

fn pattern_search(
    eval: &Evaluator<'_>,
    start: Vec<Vec<f64>>,
    search: &SearchSpec,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let m = eval.grid.len();
    let mut cur = (eval.relaxed_weights(start.clone())?, start);
    let mut step = 0.5;
    while step >= search.min_step {
        for _ in 0..search.max_passes {
            let mut improved = false;
            for i in 0..cur.1.len() {
                if eval.evaluations() >= search.budget {
                    return Ok(cur);
                }
                let row = &cur.1[i];
                let moves: Vec<(usize, usize)> = (0..m)
                    .filter(|&j| row[j] > 0.0)
                    .flat_map(|j| (0..m).filter(move |&k| k != j).map(move |k| (j, k)))
                    .collect();
                let cand = moves
                    .into_par_iter()
                    .map(|(j, k)| {
                        let mut w = cur.1.clone();
                        let amount = step.min(w[i][j]);
                        w[i][j] -= amount;
                        w[i][k] += amount;
                        Ok((eval.relaxed_weights(w.clone())?, w))
                    })
                    .try_reduce_with(|a, b| Ok(best_of_weights(a, b)));
                if let Some(c) = cand {
                    let c = c?;
                    if c.0 < cur.0 {
                        cur = c;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoding_enumerates_in_lexicographic_order() {
        assert_eq!(decode(0, 3, 2), vec![0, 0]);
        assert_eq!(decode(5, 3, 2), vec![1, 2]);
        assert_eq!(decode(8, 3, 2), vec![2, 2]);
    }

    #[test]
    fn ties_break_on_encoding() {
        let a = (1.0, vec![0, 2]);
        let b = (1.0, vec![0, 1]);
        assert_eq!(best_of(a.clone(), b.clone()), b);
        assert_eq!(best_of(b.clone(), a), b);
        let w1 = (1.0, vec![vec![0.5, 0.5]]);
        let w2 = (1.0, vec![vec![0.25, 0.75]]);
        assert_eq!(best_of_weights(w1.clone(), w2.clone()), w2);
        assert_eq!(best_of_weights(w2.clone(), w1), w2);
    }
}
