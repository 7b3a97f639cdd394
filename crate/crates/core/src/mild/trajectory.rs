use std::io::Write;

use crate::error::{domain, Result};

use super::mesh::Mesh;
use super::picard::PicardDiagnostics;

/// A solved state on a mesh, stored as `y(t) = (t - t_k)^{1-λ} x(t)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    mesh: Mesh,
    modes: usize,
    y: Vec<f64>,
    diagnostics: PicardDiagnostics,
}

impl Trajectory {
    /// `y` is laid out `[node][mode]`.
    pub fn new(
        mesh: Mesh,
        modes: usize,
        y: Vec<f64>,
        diagnostics: PicardDiagnostics,
    ) -> Result<Self> {
        if modes == 0 || y.len() != mesh.nodes().len() * modes {
            return Err(domain("Trajectory", "values do not match mesh × modes"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(domain("Trajectory", "non-finite stored value"));
        }
        Ok(Self {
            mesh,
            modes,
            y,
            diagnostics,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn diagnostics(&self) -> &PicardDiagnostics {
        &self.diagnostics
    }

    /// Stored `y` at node `n`.
    pub fn y(&self, n: usize) -> &[f64] {
        &self.y[n * self.modes..(n + 1) * self.modes]
    }

    /// `x = y / (t - t_k)^{1-λ}` at node `n`; infinite at a left endpoint when `λ < 1`.
    pub fn x(&self, n: usize) -> Vec<f64> {
        let w = self.mesh.nodes()[n].weight;
        self.y(n).iter().map(|v| v / w).collect()
    }

    /// `sup_n ‖y(t_n)‖` over each interval.
    pub fn interval_sups(&self) -> Vec<f64> {
        (0..self.mesh.interval_count())
            .map(|k| {
                self.mesh
                    .interval_range(k)
                    .map(|n| crate::operators::norm(self.y(n)))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// The piecewise-continuous weighted norm: max over intervals of `sup ‖y‖`.
    pub fn pc_norm(&self) -> f64 {
        self.interval_sups().into_iter().fold(0.0, f64::max)
    }

    /// `max_n ‖y(t_n)‖ e^{-r t_n}`.
    pub fn weighted_norm(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(domain(
                "weighted_norm",
                format!("radius must be ≥ 0, got {r}"),
            ));
        }
        Ok(self
            .mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(n, node)| crate::operators::norm(self.y(n)) * (-r * node.t).exp())
            .fold(0.0, f64::max))
    }

    /// `‖self - other‖` in the piecewise-continuous norm; meshes must coincide.
    pub fn pc_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.mesh != other.mesh || self.modes != other.modes {
            return Err(domain(
                "pc_distance",
                "trajectories live on different meshes",
            ));
        }
        let k = self.modes;
        Ok((0..self.mesh.nodes().len())
            .map(|n| {
                (0..k)
                    .map(|m| (self.y[n * k + m] - other.y[n * k + m]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max))
    }

    /// `y` at time `t` inside interval `k` by linear interpolation between nodes.
    pub fn y_at(&self, k: usize, t: f64, out: &mut [f64]) {
        let range = self.mesh.interval_range(k);
        let nodes = &self.mesh.nodes()[range.clone()];
        let j = nodes.partition_point(|n| n.t < t).clamp(1, nodes.len() - 1);
        let (a, b) = (nodes[j - 1].t, nodes[j].t);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        let (ya, yb) = (self.y(range.start + j - 1), self.y(range.start + j));
        for m in 0..self.modes {
            out[m] = (1.0 - w) * ya[m] + w * yb[m];
        }
    }

    /// Writes `interval_index,t,mode_index,y,x_reconstructed` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| domain("Trajectory::write_csv", e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["interval_index", "t", "mode_index", "y", "x_reconstructed"])
            .map_err(io)?;
        for (n, node) in self.mesh.nodes().iter().enumerate() {
            let x = self.x(n);
            for (m, (y, xm)) in self.y(n).iter().zip(&x).enumerate() {
                w.write_record(&[
                    node.interval.to_string(),
                    format!("{:e}", node.t),
                    (m + 1).to_string(),
                    format!("{y:e}"),
                    format!("{xm:e}"),
                ])
                .map_err(io)?;
            }
        }
        w.flush()
            .map_err(|e| domain("Trajectory::write_csv", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(mesh: &Mesh, f: impl Fn(usize) -> f64) -> Trajectory {
        let y = (0..mesh.nodes().len())
            .map(|n| f(mesh.nodes()[n].interval))
            .collect();
        Trajectory::new(mesh.clone(), 1, y, PicardDiagnostics::default()).unwrap()
    }

    #[test]
    fn norms_follow_their_definitions() {
        let mesh = Mesh::from_nodes(
            &[0.0, 0.5, 1.0],
            0.5,
            vec![vec![0.0, 0.25, 0.5], vec![0.5, 1.0]],
        )
        .unwrap();
        assert_eq!(flat(&mesh, |_| 0.0).pc_norm(), 0.0);
        let two = flat(&mesh, |k| if k == 0 { 1.0 } else { -3.0 });
        assert_eq!(two.pc_norm(), 3.0);
        assert_eq!(two.interval_sups(), vec![1.0, 3.0]);
        let ones = flat(&mesh, |_| 1.0);
        assert_eq!(ones.weighted_norm(2.0).unwrap(), 1.0);
        assert!((ones.weighted_norm(1e-12).unwrap() - ones.pc_norm()).abs() < 1e-15);
        let r = 3.0;
        let wn = two.weighted_norm(r).unwrap();
        assert!(wn <= two.pc_norm() && two.pc_norm() <= (r * 1.0f64).exp() * wn);
    }

    #[test]
    fn csv_rows_and_reconstruction() {
        let mesh = Mesh::from_nodes(&[0.0, 1.0], 0.5, vec![vec![0.0, 0.25, 1.0]]).unwrap();
        let traj = flat(&mesh, |_| 1.0);
        assert!(traj.x(0)[0].is_infinite());
        assert!((traj.x(1)[0] - 2.0).abs() < 1e-15);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("interval_index,t,mode_index,y,x_reconstructed"));
    }
}
