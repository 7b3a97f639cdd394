use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ_j weights_j = 1` for every relaxed piece.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A finite grid of control values `η_0 < … < η_{m-1}` spanning `Λ = [η_0, η_{m-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ControlGrid {
    atoms: Vec<f64>,
}

impl ControlGrid {
    pub fn new(atoms: Vec<f64>) -> Result<Self> {
        if atoms.len() < 2 {
            return Err(Error::Control(
                "a control grid needs at least two atoms".into(),
            ));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::Control("control atoms must be finite".into()));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Control(
                "control atoms must be strictly increasing".into(),
            ));
        }
        Ok(Self { atoms })
    }

    /// `n` equally spaced atoms on `[lo, hi]`, endpoints included.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Control(
                "a control grid needs at least two atoms".into(),
            ));
        }
        let atoms = (0..n)
            .map(|j| {
                if j + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * j as f64 / (n - 1) as f64
                }
            })
            .collect();
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(η_min, η_max)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.atoms[0], self.atoms[self.atoms.len() - 1])
    }

    /// Index of the atom nearest to `eta` (lower index on ties).
    pub fn nearest(&self, eta: f64) -> usize {
        let mut best = 0;
        for (j, a) in self.atoms.iter().enumerate() {
            if (a - eta).abs() < (self.atoms[best] - eta).abs() {
                best = j;
            }
        }
        best
    }
}

impl TryFrom<Vec<f64>> for ControlGrid {
    type Error = Error;
    fn try_from(atoms: Vec<f64>) -> Result<Self> {
        Self::new(atoms)
    }
}

impl From<ControlGrid> for Vec<f64> {
    fn from(g: ControlGrid) -> Self {
        g.atoms
    }
}

fn check_partition(breakpoints: &[f64], pieces: usize) -> Result<()> {
    if breakpoints.len() < 2 || breakpoints[0] != 0.0 {
        return Err(Error::Control(
            "breakpoints must start at 0 and contain at least one piece".into(),
        ));
    }
    if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Control(
            "breakpoints must be finite and strictly increasing".into(),
        ));
    }
    if pieces != breakpoints.len() - 1 {
        return Err(Error::Control(format!(
            "{} breakpoints define {} pieces, got {pieces} piece values",
            breakpoints.len(),
            breakpoints.len() - 1
        )));
    }
    Ok(())
}

/// Index of the piece containing `t`; the right endpoint of the last piece belongs to it.
fn piece_index(breakpoints: &[f64], t: f64) -> usize {
    breakpoints
        .partition_point(|&b| b <= t)
        .clamp(1, breakpoints.len() - 1)
        - 1
}

/// A piecewise-constant control: on `[b_i, b_{i+1})` it takes the atom `atoms[i]` (an index into the grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawOrdinary")]
pub struct OrdinaryControl {
    breakpoints: Vec<f64>,
    atoms: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrdinary {
    breakpoints: Vec<f64>,
    atoms: Vec<usize>,
}

impl TryFrom<RawOrdinary> for OrdinaryControl {
    type Error = Error;
    fn try_from(raw: RawOrdinary) -> Result<Self> {
        Self::new(raw.breakpoints, raw.atoms)
    }
}

impl OrdinaryControl {
    pub fn new(breakpoints: Vec<f64>, atoms: Vec<usize>) -> Result<Self> {
        check_partition(&breakpoints, atoms.len())?;
        Ok(Self { breakpoints, atoms })
    }

    /// `u ≡ η_atom` on `[0, T]`.
    pub fn constant(horizon: f64, atom: usize) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![atom])
    }

    /// `P` equal pieces on `[0, T]`.
    pub fn uniform(horizon: f64, atoms: Vec<usize>) -> Result<Self> {
        let p = atoms.len();
        let bps = uniform_breakpoints(horizon, p);
        Self::new(bps, atoms)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn pieces(&self) -> usize {
        self.atoms.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Atom index in force at time `t`.
    pub fn atom_at(&self, t: f64) -> usize {
        self.atoms[piece_index(&self.breakpoints, t)]
    }

    /// Checks every atom index against `grid`.
    pub fn validate(&self, grid: &ControlGrid) -> Result<()> {
        match self.atoms.iter().find(|&&a| a >= grid.len()) {
            Some(a) => Err(Error::Control(format!(
                "atom index {a} outside a grid of {}",
                grid.len()
            ))),
            None => Ok(()),
        }
    }

    /// Compact encoding used to break ties deterministically.
    pub fn encoding(&self) -> String {
        self.atoms
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// `n` equal pieces of `[0, T]`, the last breakpoint exactly `T`.
pub fn uniform_breakpoints(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if j == n {
                horizon
            } else {
                horizon * j as f64 / n as f64
            }
        })
        .collect()
}

/// A piecewise-constant probability-valued control: on piece `i` the measure
/// `Σ_j weights[i][j] δ_{η_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawRelaxed")]
pub struct RelaxedControl {
    breakpoints: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelaxed {
    breakpoints: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<RawRelaxed> for RelaxedControl {
    type Error = Error;
    fn try_from(raw: RawRelaxed) -> Result<Self> {
        Self::new(raw.breakpoints, raw.weights)
    }
}

impl RelaxedControl {
    /// Every row must be nonnegative and sum to 1 within [`SIMPLEX_TOL`].
    pub fn new(breakpoints: Vec<f64>, weights: Vec<Vec<f64>>) -> Result<Self> {
        check_partition(&breakpoints, weights.len())?;
        let m = weights[0].len();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != m || m == 0 {
                return Err(Error::Control(format!(
                    "piece {i} has {} weights, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                return Err(Error::Control(format!(
                    "piece {i} has a negative or non-finite weight"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Control(format!(
                    "piece {i} weights sum to {s}, not 1"
                )));
            }
        }
        Ok(Self {
            breakpoints,
            weights,
        })
    }

    /// The same measure on all of `[0, T]`.
    pub fn constant(horizon: f64, weights: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![weights])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn pieces(&self) -> usize {
        self.weights.len()
    }

    pub fn atom_count(&self) -> usize {
        self.weights[0].len()
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Weights in force at time `t`.
    pub fn weights_at(&self, t: f64) -> &[f64] {
        &self.weights[piece_index(&self.breakpoints, t)]
    }

    pub fn validate(&self, grid: &ControlGrid) -> Result<()> {
        if self.atom_count() != grid.len() {
            return Err(Error::Control(format!(
                "relaxed control has {} weights per piece, grid has {} atoms",
                self.atom_count(),
                grid.len()
            )));
        }
        Ok(())
    }

    /// True when every piece is a Dirac measure.
    pub fn is_dirac(&self) -> bool {
        self.weights
            .iter()
            .all(|row| row.iter().filter(|&&w| w > 0.0).count() == 1)
    }

    /// Compact encoding used to break ties deterministically.
    pub fn encoding(&self) -> String {
        self.weights
            .iter()
            .map(|row| {
                row.iter()
                    .map(|w| format!("{w:.17e}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// The Dirac embedding `u ↦ δ_{u(·)}`: one-hot weights on the same pieces.
pub fn embed_dirac(u: &OrdinaryControl, grid: &ControlGrid) -> Result<RelaxedControl> {
    u.validate(grid)?;
    let weights = u
        .atoms()
        .iter()
        .map(|&a| {
            let mut row = vec![0.0; grid.len()];
            row[a] = 1.0;
            row
        })
        .collect();
    RelaxedControl::new(u.breakpoints().to_vec(), weights)
}
