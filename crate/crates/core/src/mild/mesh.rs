//! Meshes on `[0, T]` split at the impulse times.
//!
//! Each interval `[t_k, t_{k+1}]` carries its own node list, both endpoints
//! included: the first node stands for `t_k^+` and the last for `t_{k+1}^-`,
//! so an impulse time appears once in each neighbouring interval.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

use super::picard::PicardOptions;

/// How to build a mesh: `N` cells per interval graded toward the left end as
/// `t_k + h (j/N)^r`, refined by extra breakpoints (control switch times).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSpec {
    pub nodes_per_interval: usize,
    /// Grading exponent `r`; `None` selects `1/λ`.
    pub grading: Option<f64>,
    pub breakpoints: Vec<f64>,
    /// Stop rule for solves on this mesh; configured separately, never serialized here.
    #[serde(skip)]
    pub picard: PicardOptions,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            nodes_per_interval: 64,
            grading: None,
            breakpoints: Vec::new(),
            picard: PicardOptions::default(),
        }
    }
}

impl MeshSpec {
    pub fn with_nodes(nodes_per_interval: usize) -> Self {
        Self {
            nodes_per_interval,
            ..Self::default()
        }
    }

    /// The same spec with `extra` merged into the breakpoints.
    pub fn refined_by(&self, extra: &[f64]) -> Self {
        let mut out = self.clone();
        out.breakpoints.extend_from_slice(extra);
        out
    }
}

/// Node `n` of a mesh: time, interval index and singular weight `(t - t_k)^{1-λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub interval: usize,
    pub weight: f64,
}

/// One cell `[left, right]` between consecutive nodes of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    boundaries: Vec<f64>,
    lambda: f64,
    nodes: Vec<Node>,
    /// Global node range of each interval.
    ranges: Vec<std::ops::Range<usize>>,
    cells: Vec<Cell>,
}

impl Mesh {
    /// Builds the graded mesh on `0 = t_0 < t_1 < … < t_n < t_{n+1} = T`.
    pub fn build(boundaries: &[f64], lambda: f64, spec: &MeshSpec) -> Result<Self> {
        check_boundaries(boundaries)?;
        if spec.nodes_per_interval < 1 {
            return Err(domain("Mesh::build", "need at least one cell per interval"));
        }
        let r = spec.grading.unwrap_or(1.0 / lambda);
        if !(r >= 1.0 && r.is_finite()) {
            return Err(domain(
                "Mesh::build",
                format!("grading exponent must be ≥ 1, got {r}"),
            ));
        }
        let horizon = *boundaries.last().unwrap();
        if let Some(b) = spec
            .breakpoints
            .iter()
            .find(|b| !(**b >= 0.0 && **b <= horizon))
        {
            return Err(domain(
                "Mesh::build",
                format!("breakpoint {b} outside [0, {horizon}]"),
            ));
        }
        let n = spec.nodes_per_interval;
        let mut per_interval = Vec::with_capacity(boundaries.len() - 1);
        for w in boundaries.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            let graded: Vec<f64> = (0..=n)
                .map(|j| {
                    if j == n {
                        b
                    } else {
                        a + h * (j as f64 / n as f64).powf(r)
                    }
                })
                .collect();
            let mut extra: Vec<f64> = spec
                .breakpoints
                .iter()
                .copied()
                .filter(|&s| s > a && s < b)
                .collect();
            extra.sort_by(f64::total_cmp);
            extra.dedup_by(|p, q| (*p - *q).abs() <= 1e-13 * horizon);
            per_interval.push(merge(&graded, &extra, 1e-13 * horizon));
        }
        Self::from_nodes(boundaries, lambda, per_interval)
    }

    /// A mesh from explicit node lists, one per interval, each running from
    /// `t_k` to `t_{k+1}` inclusive.
    pub fn from_nodes(
        boundaries: &[f64],
        lambda: f64,
        per_interval: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_boundaries(boundaries)?;
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(domain(
                "Mesh",
                format!("λ must lie in (0, 1], got {lambda}"),
            ));
        }
        if per_interval.len() + 1 != boundaries.len() {
            return Err(domain("Mesh", "one node list per interval required"));
        }
        let mut nodes = Vec::new();
        let mut ranges = Vec::new();
        let mut cells = Vec::new();
        for (k, list) in per_interval.iter().enumerate() {
            let (a, b) = (boundaries[k], boundaries[k + 1]);
            if list.len() < 2 || list[0] != a || *list.last().unwrap() != b {
                return Err(domain(
                    "Mesh",
                    format!("interval {k} nodes must run from {a} to {b}"),
                ));
            }
            crate::quad::check_nodes("Mesh", list)?;
            let start = nodes.len();
            for &t in list {
                nodes.push(Node {
                    t,
                    interval: k,
                    weight: singular_weight(t - a, lambda),
                });
            }
            for i in start..nodes.len() - 1 {
                cells.push(Cell {
                    left: i,
                    right: i + 1,
                });
            }
            ranges.push(start..nodes.len());
        }
        Ok(Self {
            boundaries: boundaries.to_vec(),
            lambda,
            nodes,
            ranges,
            cells,
        })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn horizon(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn interval_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn interval_range(&self, k: usize) -> std::ops::Range<usize> {
        self.ranges[k].clone()
    }

    /// Cells lying entirely before node `n` (in time order, within or before its interval).
    pub fn cells_before(&self, n: usize) -> usize {
        // every interval before contributes len - 1 cells
        let k = self.nodes[n].interval;
        n - k
    }

    /// Time of the midpoint of a cell, used to pick its control value.
    pub fn cell_mid(&self, c: usize) -> f64 {
        let cell = self.cells[c];
        0.5 * (self.nodes[cell.left].t + self.nodes[cell.right].t)
    }

    /// All node times of the mesh as a flat list (impulse times repeated).
    pub fn times(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.t).collect()
    }
}

/// `d^{1-λ}` with `0^0 = 1` so that `λ = 1` gives a unit weight everywhere.
pub(crate) fn singular_weight(d: f64, lambda: f64) -> f64 {
    if lambda == 1.0 {
        1.0
    } else {
        d.powf(1.0 - lambda)
    }
}

fn check_boundaries(b: &[f64]) -> Result<()> {
    if b.len() < 2 || b[0] != 0.0 {
        return Err(domain(
            "Mesh",
            "boundaries must start at 0 and contain the horizon",
        ));
    }
    crate::quad::check_nodes("Mesh", b)
}

/// Union of graded nodes and breakpoints; a graded node within a quarter of
/// its local spacing of a breakpoint is dropped so no sliver cells appear.
fn merge(graded: &[f64], extra: &[f64], eps: f64) -> Vec<f64> {
    if extra.is_empty() {
        return graded.to_vec();
    }
    let last = graded.len() - 1;
    let mut keep: Vec<f64> = Vec::with_capacity(graded.len() + extra.len());
    for (j, &s) in graded.iter().enumerate() {
        if j == 0 || j == last {
            keep.push(s);
            continue;
        }
        let spacing = (graded[j + 1] - graded[j - 1]) * 0.5;
        let i = extra.partition_point(|&e| e < s);
        let near = [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|i| extra.get(i))
            .any(|&e| (e - s).abs() < 0.25 * spacing);
        if !near {
            keep.push(s);
        }
    }
    keep.extend_from_slice(extra);
    keep.sort_by(f64::total_cmp);
    keep.dedup_by(|p, q| (*p - *q).abs() <= eps);
    keep
}
