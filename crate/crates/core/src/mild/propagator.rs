//! Precomputed factors of the Picard operator on one mesh.
//!
//! For a target node `t` in interval `k` with weight `w = (t - t_k)^{1-λ}`,
//! the stored solution `y(t) = w x(t)` is
//!
//! `y(t) = w S(t) x₀ + Σ_{i≤k} w S(t - t_i) φ_i + Σ_cells (A ⊙ g(s₀) + B ⊙ g(s₁))`,
//!
//! where `A, B` integrate the kernel `w τ^{μ-1} E_{μ,μ}(a τ^μ)` against the
//! hat functions of each cell. All factors depend only on the mesh and the
//! spectrum, so one propagator serves every control and every sweep.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::operators::SpectralGenerator;
use crate::quad::{cell_weights, Kernel};
use crate::specfun::{HilferParams, MittagLefflerTable};

use super::mesh::Mesh;

/// `E_{μ,β}(-x)` tables for the four parameters the solver needs.
#[derive(Debug, Clone)]
pub struct ResolventTables {
    mu: f64,
    lambda: f64,
    kernel: MittagLefflerTable,
    first: MittagLefflerTable,
    second: MittagLefflerTable,
    solution: MittagLefflerTable,
}

impl ResolventTables {
    /// Tables valid for `|a| τ^μ ≤ |a_min| T^μ`.
    pub fn new(params: &HilferParams, gen: &SpectralGenerator, horizon: f64) -> Result<Self> {
        let (mu, lambda) = (params.mu(), params.lambda());
        let a_max = gen.eigenvalues().iter().fold(0.0f64, |m, a| m.max(-a));
        let x_max = a_max * horizon.powf(mu) * (1.0 + 1e-9);
        Ok(Self {
            mu,
            lambda,
            kernel: MittagLefflerTable::new(mu, mu, x_max)?,
            first: MittagLefflerTable::new(mu, mu + 1.0, x_max)?,
            second: MittagLefflerTable::new(mu, mu + 2.0, x_max)?,
            solution: MittagLefflerTable::new(mu, lambda, x_max)?,
        })
    }

    /// `τ^{λ-1} E_{μ,λ}(a τ^μ)`, the spectral factor of `S_{μ,ν}(τ)`.
    pub fn s_factor(&self, a: f64, tau: f64) -> f64 {
        tau.powf(self.lambda - 1.0) * self.solution.eval(-a * tau.powf(self.mu))
    }

    /// `E_{μ,λ}(a τ^μ)`: the `S` factor with its singular weight removed.
    pub fn s_factor_weighted(&self, a: f64, tau: f64) -> f64 {
        self.solution.eval(-a * tau.powf(self.mu))
    }

    pub fn kernel(&self, a: f64) -> ModeKernel<'_> {
        ModeKernel { tables: self, a }
    }
}

/// `k(τ) = τ^{μ-1} E_{μ,μ}(a τ^μ)` with `F1 = τ^μ E_{μ,μ+1}`, `F2 = τ^{μ+1} E_{μ,μ+2}`.
#[derive(Debug, Clone, Copy)]
pub struct ModeKernel<'a> {
    tables: &'a ResolventTables,
    a: f64,
}

impl Kernel for ModeKernel<'_> {
    fn k(&self, tau: f64) -> f64 {
        let tm = tau.powf(self.tables.mu);
        tm / tau * self.tables.kernel.eval(-self.a * tm)
    }
    fn f1(&self, tau: f64) -> f64 {
        let tm = tau.powf(self.tables.mu);
        tm * self.tables.first.eval(-self.a * tm)
    }
    fn f2(&self, tau: f64) -> f64 {
        let tm = tau.powf(self.tables.mu);
        tm * tau * self.tables.second.eval(-self.a * tm)
    }
}

/// All Picard factors for one (mesh, spectrum, parameters) triple.
#[derive(Debug, Clone)]
pub struct Propagator {
    mesh: Mesh,
    modes: usize,
    /// `[node][mode]` factor on `x₀`.
    initial: Vec<f64>,
    /// `[impulse][node][mode]` factor on `φ_i`.
    jumps: Vec<Vec<f64>>,
    /// Start of each node's block in `weights`.
    offsets: Vec<usize>,
    /// `[node][cell][mode][A, B]`.
    weights: Vec<f64>,
}

impl Propagator {
    pub fn new(mesh: Mesh, params: &HilferParams, gen: &SpectralGenerator) -> Result<Self> {
        if (mesh.lambda() - params.lambda()).abs() > 1e-15 {
            return Err(domain("Propagator", "mesh was graded for a different λ"));
        }
        let tables = ResolventTables::new(params, gen, mesh.horizon())?;
        let modes = gen.mode_count();
        let eig = gen.eigenvalues();
        let nodes = mesh.nodes();
        let bounds = mesh.boundaries().to_vec();

        let mut initial = vec![0.0; nodes.len() * modes];
        for (n, node) in nodes.iter().enumerate() {
            let row = &mut initial[n * modes..(n + 1) * modes];
            if node.t == 0.0 {
                row.iter_mut()
                    .zip(eig)
                    .for_each(|(r, a)| *r = tables.s_factor_weighted(*a, 0.0));
            } else if node.interval == 0 {
                row.iter_mut()
                    .zip(eig)
                    .for_each(|(r, a)| *r = tables.s_factor_weighted(*a, node.t));
            } else {
                row.iter_mut()
                    .zip(eig)
                    .for_each(|(r, a)| *r = node.weight * tables.s_factor(*a, node.t));
            }
        }

        let mut jumps = Vec::with_capacity(bounds.len().saturating_sub(2));
        for (i, &ti) in bounds.iter().enumerate().take(bounds.len() - 1).skip(1) {
            let mut f = vec![0.0; nodes.len() * modes];
            for (n, node) in nodes.iter().enumerate() {
                if node.interval < i {
                    continue;
                }
                let row = &mut f[n * modes..(n + 1) * modes];
                let tau = node.t - ti;
                if node.interval == i {
                    row.iter_mut()
                        .zip(eig)
                        .for_each(|(r, a)| *r = tables.s_factor_weighted(*a, tau));
                } else {
                    row.iter_mut()
                        .zip(eig)
                        .for_each(|(r, a)| *r = node.weight * tables.s_factor(*a, tau));
                }
            }
            jumps.push(f);
        }

        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        let mut total = 0;
        for n in 0..nodes.len() {
            offsets.push(total);
            total += mesh.cells_before(n) * modes * 2;
        }
        offsets.push(total);

        let cells = mesh.cells();
        let blocks: Vec<Vec<f64>> = (0..nodes.len())
            .into_par_iter()
            .map(|n| {
                let node = nodes[n];
                let count = mesh.cells_before(n);
                let mut block = vec![0.0; count * modes * 2];
                if node.weight == 0.0 {
                    return block;
                }
                for (m, a) in eig.iter().enumerate() {
                    let kernel = tables.kernel(*a);
                    for (c, cell) in cells[..count].iter().enumerate() {
                        let (s0, s1) = (nodes[cell.left].t, nodes[cell.right].t);
                        let (wa, wb) = cell_weights(&kernel, node.t, s0, s1);
                        let at = (c * modes + m) * 2;
                        block[at] = node.weight * wa;
                        block[at + 1] = node.weight * wb;
                    }
                }
                block
            })
            .collect();
        let mut weights = Vec::with_capacity(total);
        for b in blocks {
            weights.extend(b);
        }

        Ok(Self {
            mesh,
            modes,
            initial,
            jumps,
            offsets,
            weights,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `y` at every node for `g ≡ 0` given the initial datum and jump values.
    pub(crate) fn free_part(&self, n: usize, x0: &[f64], phis: &[Vec<f64>], out: &mut [f64]) {
        let k = self.modes;
        let base = &self.initial[n * k..(n + 1) * k];
        for m in 0..k {
            out[m] = base[m] * x0[m];
        }
        for (i, phi) in phis.iter().enumerate() {
            let f = &self.jumps[i][n * k..(n + 1) * k];
            for m in 0..k {
                out[m] += f[m] * phi[m];
            }
        }
    }

    /// Adds the forcing integral at node `n` given per-cell endpoint values
    /// `g_left[c]`, `g_right[c]` (flattened `[cell][mode]`).
    pub(crate) fn add_forcing(&self, n: usize, g_left: &[f64], g_right: &[f64], out: &mut [f64]) {
        let k = self.modes;
        let block = &self.weights[self.offsets[n]..self.offsets[n + 1]];
        for (c, w) in block.chunks_exact(2 * k).enumerate() {
            let gl = &g_left[c * k..(c + 1) * k];
            let gr = &g_right[c * k..(c + 1) * k];
            for m in 0..k {
                out[m] += w[2 * m] * gl[m] + w[2 * m + 1] * gr[m];
            }
        }
    }

    /// Bytes held by the weight arrays; a sizing aid for callers.
    pub fn footprint(&self) -> usize {
        8 * (self.weights.len()
            + self.initial.len()
            + self.jumps.iter().map(Vec::len).sum::<usize>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mild::mesh::MeshSpec;
    use crate::quad::tanh_sinh;
    use crate::specfun::mittag_leffler;

    #[test]
    fn mode_kernel_matches_direct_formula() {
        let p = HilferParams::new(0.6, 0.5).unwrap();
        let gen = SpectralGenerator::new(vec![-4.0]).unwrap();
        let t = ResolventTables::new(&p, &gen, 1.0).unwrap();
        let k = t.kernel(-4.0);
        for &tau in &[1e-6f64, 0.01, 0.3, 1.0] {
            let want = tau.powf(-0.4) * mittag_leffler(0.6, 0.6, -4.0 * tau.powf(0.6)).unwrap();
            assert!((k.k(tau) - want).abs() < 1e-12 * want.abs());
            // F1 is the antiderivative of k
            let int = tanh_sinh(|s, _, _| k.k(s), 0.0, tau, 1e-14).value;
            assert!((k.f1(tau) - int).abs() < 1e-11 * int, "τ={tau}");
        }
    }

    #[test]
    fn forcing_of_constant_matches_quadrature() {
        // ∫_0^t k(t-s) ds = F1(t) for g ≡ 1
        let p = HilferParams::new(0.5, 0.8).unwrap();
        let gen = SpectralGenerator::new(vec![-1.0, -9.0]).unwrap();
        let mesh = Mesh::build(&[0.0, 0.5, 1.0], p.lambda(), &MeshSpec::with_nodes(16)).unwrap();
        let prop = Propagator::new(mesh, &p, &gen).unwrap();
        let cells = prop.mesh().cells().len();
        let ones = vec![1.0; cells * 2];
        let tables = ResolventTables::new(&p, &gen, 1.0).unwrap();
        for (n, node) in prop.mesh().nodes().iter().enumerate() {
            let mut out = vec![0.0; 2];
            prop.add_forcing(n, &ones, &ones, &mut out);
            for (m, a) in [-1.0, -9.0].iter().enumerate() {
                let want = node.weight * tables.kernel(*a).f1(node.t);
                assert!(
                    (out[m] - want).abs() < 1e-12,
                    "n={n} m={m}: {} vs {want}",
                    out[m]
                );
            }
        }
    }
}
