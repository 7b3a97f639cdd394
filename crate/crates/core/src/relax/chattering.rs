use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

use super::controls::{uniform_breakpoints, ControlGrid, OrdinaryControl, RelaxedControl};

/// Slots shorter than this fraction of `T` cannot be represented faithfully.
pub const MIN_SLOT: f64 = 1e-12;

/// The chattering realization of a relaxed control.
///
/// `[0, T]` is cut into `n_cells` equal cells, refined by the pieces of `v`
/// and by `required` times (impulse times). Uniform cut points closer than a
/// quarter cell to a required one are dropped, so no sliver cells appear.
/// Each cell is split into consecutive slots of lengths `weights_j · Δ`, in
/// ascending atom order; neighbouring slots with the same atom inside one
/// piece of `v` are merged, so a Dirac `v` returns its underlying control.
pub fn chattering_approximate(
    v: &RelaxedControl,
    n_cells: usize,
    required: &[f64],
) -> Result<OrdinaryControl> {
    if n_cells < v.pieces() {
        return Err(Error::Refinement(format!(
            "{n_cells} cells cannot refine a control with {} pieces",
            v.pieces()
        )));
    }
    let horizon = v.horizon();
    let cuts = cell_boundaries(v.breakpoints(), required, horizon, n_cells);
    let min_slot = MIN_SLOT * horizon;
    let mut breakpoints = vec![0.0];
    let mut atoms: Vec<usize> = Vec::new();
    let mut piece_of_last = usize::MAX;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = v.breakpoints().partition_point(|&s| s <= 0.5 * (a + b)) - 1;
        let row = &v.weights()[piece];
        let active: Vec<usize> = (0..row.len()).filter(|&j| row[j] > 0.0).collect();
        let mut cum = 0.0;
        for (s, &j) in active.iter().enumerate() {
            cum += row[j];
            let end = if s + 1 == active.len() {
                b
            } else {
                a + (b - a) * cum
            };
            let start = *breakpoints.last().unwrap();
            if end - start < min_slot {
                return Err(Error::Refinement(format!(
                    "slot of width {:e} for atom {j} is below the resolution {min_slot:e}",
                    end - start
                )));
            }
            if piece == piece_of_last && atoms.last() == Some(&j) {
                *breakpoints.last_mut().unwrap() = end;
            } else {
                breakpoints.push(end);
                atoms.push(j);
            }
            piece_of_last = piece;
        }
    }
    OrdinaryControl::new(breakpoints, atoms)
}

/// Sorted cut points: required times plus uniform points not crowding them.
fn cell_boundaries(pieces: &[f64], required: &[f64], horizon: f64, n: usize) -> Vec<f64> {
    let mut fixed: Vec<f64> = pieces
        .iter()
        .chain(required)
        .copied()
        .filter(|&t| t >= 0.0 && t <= horizon)
        .collect();
    fixed.sort_by(f64::total_cmp);
    fixed.dedup();
    let gap = 0.25 * horizon / n as f64;
    let mut cuts: Vec<f64> = uniform_breakpoints(horizon, n)
        .into_iter()
        .filter(|&t| {
            let i = fixed.partition_point(|&f| f < t);
            let near = |f: Option<&f64>| f.is_some_and(|f| (f - t).abs() < gap);
            !near(fixed.get(i)) && !(i > 0 && near(fixed.get(i - 1)))
        })
        .collect();
    cuts.extend(fixed);
    cuts.sort_by(f64::total_cmp);
    cuts
}

/// A tensor family `P_a(τ) P_b(ξ)` of Legendre polynomials in rescaled time
/// `τ ∈ [-1, 1]` and control `ξ ∈ [-1, 1]`, with `a < time_degree`, `b < control_degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFamily {
    pub time_degree: usize,
    pub control_degree: usize,
}

impl Default for TestFamily {
    fn default() -> Self {
        Self {
            time_degree: 4,
            control_degree: 4,
        }
    }
}

impl TestFamily {
    /// Version tag recorded next to every reported gap.
    pub fn tag(&self) -> String {
        format!("legendre-{}x{}-v1", self.time_degree, self.control_degree)
    }
}

/// `P_0(x), …, P_{n-1}(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n);
    for k in 0..n {
        p.push(match k {
            0 => 1.0,
            1 => x,
            _ => ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64,
        });
    }
    p
}

/// `max_f |∫_0^T Σ_j f(t, η_j)(v_j(t) - w_j(t)) dt|` over the test family.
///
/// The pairing is exact: on each common piece the control weights are
/// constant and the time factor is a polynomial integrated by Gauss-Legendre.
pub fn weak_star_gap(
    grid: &ControlGrid,
    v: &RelaxedControl,
    w: &RelaxedControl,
    family: &TestFamily,
) -> Result<f64> {
    v.validate(grid)?;
    w.validate(grid)?;
    let horizon = v.horizon();
    if (w.horizon() - horizon).abs() > 1e-14 * horizon {
        return Err(Error::Control("controls live on different horizons".into()));
    }
    let (na, nb) = (family.time_degree, family.control_degree);
    if na == 0 || nb == 0 {
        return Ok(0.0);
    }
    let (lo, hi) = grid.bounds();
    let eta_basis: Vec<Vec<f64>> = grid
        .atoms()
        .iter()
        .map(|&e| legendre(nb, (2.0 * e - lo - hi) / (hi - lo)))
        .collect();
    let gl = gauss_legendre(na.div_ceil(2).max(1));
    let mut cuts: Vec<f64> = v
        .breakpoints()
        .iter()
        .chain(w.breakpoints())
        .copied()
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * horizon);
    let mut pairing = vec![0.0; na * nb];
    for c in cuts.windows(2) {
        let (a, b) = (c[0], c[1]);
        let mid = 0.5 * (a + b);
        let (vw, ww) = (v.weights_at(mid), w.weights_at(mid));
        let mut e = vec![0.0; nb];
        for (j, basis) in eta_basis.iter().enumerate() {
            let d = vw[j] - ww[j];
            if d != 0.0 {
                for bi in 0..nb {
                    e[bi] += basis[bi] * d;
                }
            }
        }
        if e.iter().all(|&x| x == 0.0) {
            continue;
        }
        let mut time = vec![0.0; na];
        for (x, wt) in gl.0.iter().zip(gl.1) {
            let t = mid + 0.5 * (b - a) * x;
            for (ai, p) in legendre(na, 2.0 * t / horizon - 1.0)
                .into_iter()
                .enumerate()
            {
                time[ai] += 0.5 * (b - a) * wt * p;
            }
        }
        for ai in 0..na {
            for bi in 0..nb {
                pairing[ai * nb + bi] += time[ai] * e[bi];
            }
        }
    }
    Ok(pairing.into_iter().fold(0.0, |m, x| m.max(x.abs())))
}
