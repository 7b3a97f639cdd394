//! Piecewise Chebyshev tables for `x ↦ E_{μ,β}(-x)` on `[0, x_max]`.
//!
//! For `0 < μ ≤ 1` and `β ≥ μ` the function is completely monotone, hence
//! positive, so panels are refined until the Chebyshev tail is below a fixed
//! fraction of the smallest sampled value: accuracy is relative throughout,
//! limited only by the noise of the pointwise evaluation.

use super::mittag_leffler::mittag_leffler;
use crate::error::{domain, Error, Result};

const DEGREE: usize = 24;
const TAIL_TOLERANCE: f64 = 2e-14;
const MAX_DEPTH: u32 = 40;
/// Relative tail accepted once bisection stops shrinking it: what remains is
/// evaluation noise of the underlying function, which refinement cannot remove.
const NOISE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Panel {
    left: f64,
    right: f64,
    coeffs: [f64; DEGREE],
}

/// Tabulated `E_{μ,β}(-x)` for `x ∈ [0, x_max]`.
#[derive(Debug, Clone)]
pub struct MittagLefflerTable {
    mu: f64,
    beta: f64,
    x_max: f64,
    panels: Vec<Panel>,
}

impl MittagLefflerTable {
    pub fn new(mu: f64, beta: f64, x_max: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0 && beta >= mu) {
            return Err(domain(
                "MittagLefflerTable",
                format!("need 0 < μ ≤ 1 and β ≥ μ, got ({mu}, {beta})"),
            ));
        }
        if !(x_max >= 0.0 && x_max.is_finite()) {
            return Err(domain("MittagLefflerTable", format!("bad range {x_max}")));
        }
        let x_max = x_max.max(1.0);
        let mut panels = Vec::new();
        // geometric outline: [0, 1/2], [1/2, 1], [1, 2], ...
        let mut edges = vec![0.0, 0.5];
        while *edges.last().unwrap() < x_max {
            let next = (edges.last().unwrap() * 2.0).min(x_max);
            edges.push(next);
        }
        for w in edges.windows(2) {
            refine(mu, beta, w[0], w[1], 0, f64::INFINITY, &mut panels)?;
        }
        Ok(Self {
            mu,
            beta,
            x_max,
            panels,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// `E_{μ,β}(-x)`; falls back to direct evaluation beyond the table.
    pub fn eval(&self, x: f64) -> f64 {
        if !(x >= 0.0 && x <= self.x_max) {
            return mittag_leffler(self.mu, self.beta, -x).unwrap_or(f64::NAN);
        }
        let i = self
            .panels
            .partition_point(|p| p.right < x)
            .min(self.panels.len() - 1);
        let p = &self.panels[i];
        let u = (2.0 * x - p.left - p.right) / (p.right - p.left);
        clenshaw(&p.coeffs, u)
    }
}

fn refine(
    mu: f64,
    beta: f64,
    left: f64,
    right: f64,
    depth: u32,
    parent: f64,
    out: &mut Vec<Panel>,
) -> Result<()> {
    let mut samples = [0.0; DEGREE];
    for (j, s) in samples.iter_mut().enumerate() {
        let u = (std::f64::consts::PI * (j as f64 + 0.5) / DEGREE as f64).cos();
        let x = 0.5 * (left + right) + 0.5 * (right - left) * u;
        *s = mittag_leffler(mu, beta, -x)?;
    }
    let mut coeffs = [0.0; DEGREE];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, s) in samples.iter().enumerate() {
            acc += s * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / DEGREE as f64).cos();
        }
        *c = acc * 2.0 / DEGREE as f64;
    }
    coeffs[0] *= 0.5;
    let floor = samples.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let tail = coeffs[DEGREE - 3..].iter().map(|c| c.abs()).sum::<f64>();
    let relative = tail / floor;
    // a smooth function's tail drops by orders of magnitude per bisection
    let stalled = relative > 0.1 * parent && relative <= NOISE_TOLERANCE;
    if tail <= TAIL_TOLERANCE * floor || floor == 0.0 && tail == 0.0 || stalled {
        out.push(Panel {
            left,
            right,
            coeffs,
        });
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Accuracy {
            op: "MittagLefflerTable",
            achieved: relative,
        });
    }
    let mid = 0.5 * (left + right);
    refine(mu, beta, left, mid, depth + 1, relative, out)?;
    refine(mu, beta, mid, right, depth + 1, relative, out)
}

fn clenshaw(c: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + c[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_evaluation() {
        for &(mu, beta) in &[
            (0.5, 0.5),
            (0.5, 1.5),
            (0.3, 2.3),
            (0.9, 0.9),
            (0.75, 1.0),
            (1.0, 1.0),
            (1.0, 3.0),
        ] {
            let table = MittagLefflerTable::new(mu, beta, 300.0).unwrap();
            let mut worst = 0.0f64;
            for i in 0..3001 {
                let x = 300.0 * (i as f64 / 3000.0).powi(2) + 1e-3 * (i % 7) as f64;
                let x = x.min(300.0);
                let want = mittag_leffler(mu, beta, -x).unwrap();
                worst = worst.max(((table.eval(x) - want) / want).abs());
            }
            assert!(
                worst < 1e-12,
                "μ={mu} β={beta}: {worst:e} over {} panels",
                table.panels.len()
            );
        }
    }

    #[test]
    fn order_near_one_settles_at_evaluation_noise() {
        for beta in [0.999, 1.0] {
            let table = MittagLefflerTable::new(0.999, beta, 300.0).unwrap();
            for i in 0..600 {
                let x = 0.5 * i as f64 + 0.013;
                let want = mittag_leffler(0.999, beta, -x).unwrap();
                assert!(
                    ((table.eval(x) - want) / want).abs() < NOISE_TOLERANCE,
                    "β={beta} x={x}"
                );
            }
        }
    }

    #[test]
    fn rejects_outside_monotone_range() {
        assert!(MittagLefflerTable::new(0.5, 0.4, 10.0).is_err());
        assert!(MittagLefflerTable::new(1.2, 1.0, 10.0).is_err());
    }
}
