//! Quadrature rules: double-exponential transforms for endpoint singularities
//! and half-infinite ranges, Gauss-Legendre for smooth panels, and product
//! integration of piecewise-linear data against a weakly singular kernel.
//!
//! Double-exponential tables are built once per process and shared.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Value of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const DE_LEVELS: usize = 8;

/// One abscissa of the tanh-sinh rule on `[-1, 1]`, stored through the
/// distances to both endpoints so that endpoint singularities keep full
/// relative precision.
#[derive(Debug, Clone, Copy)]
struct TsNode {
    left: f64,
    right: f64,
    weight: f64,
}

/// Nodes added at each refinement level; level `l` uses step `2^-l`.
fn tanh_sinh_table() -> &'static [Vec<TsNode>] {
    static TABLE: OnceLock<Vec<Vec<TsNode>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let t_max = 6.0;
        let mut levels = Vec::with_capacity(DE_LEVELS + 1);
        for level in 0..=DE_LEVELS {
            let h = 0.5f64.powi(level as i32);
            let mut nodes = Vec::new();
            let mut k: i64 = if level == 0 { 0 } else { 1 };
            let stride = if level == 0 { 1 } else { 2 };
            loop {
                let t = k as f64 * h;
                if t > t_max {
                    break;
                }
                for s in [-1.0, 1.0] {
                    if k == 0 && s > 0.0 {
                        continue;
                    }
                    let tt = s * t;
                    let u = HALF_PI * tt.sinh();
                    // 1 - tanh(u) = 2 e^{-2u} / (1 + e^{-2u}), evaluated without overflow.
                    let (left, right) = if u >= 0.0 {
                        let e = (-2.0 * u).exp();
                        (2.0 / (1.0 + e), 2.0 * e / (1.0 + e))
                    } else {
                        let e = (2.0 * u).exp();
                        (2.0 * e / (1.0 + e), 2.0 / (1.0 + e))
                    };
                    let e = (-2.0 * u.abs()).exp();
                    let weight = HALF_PI * tt.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
                    if weight > 0.0 && left > 0.0 && right > 0.0 {
                        nodes.push(TsNode {
                            left,
                            right,
                            weight,
                        });
                    }
                }
                k += stride;
            }
            levels.push(nodes);
        }
        levels
    })
}

/// Integrates `f` over `[a, b]` by the tanh-sinh rule, refining until two
/// successive levels agree to `tol` relative (or absolutely below `tol * scale`).
///
/// `f` receives `(s, s - a, b - s)`; the distances are exact to working
/// precision even where `s` itself rounds to an endpoint.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, tol: f64) -> Estimate
where
    F: FnMut(f64, f64, f64) -> f64,
{
    let half = 0.5 * (b - a);
    let table = tanh_sinh_table();
    let mut sum = 0.0;
    let mut evaluations = 0;
    let mut previous = f64::NAN;
    let mut error = f64::INFINITY;
    let mut value = 0.0;
    for (level, nodes) in table.iter().enumerate() {
        for n in nodes {
            let dl = half * n.left;
            let dr = half * n.right;
            let s = if dl < dr { a + dl } else { b - dr };
            let v = f(s, dl, dr);
            evaluations += 1;
            if v.is_finite() {
                sum += n.weight * v;
            }
        }
        let h = 0.5f64.powi(level as i32);
        value = half * h * sum;
        if level >= 3 {
            error = (value - previous).abs();
            if error <= tol * value.abs() || error <= f64::MIN_POSITIVE {
                break;
            }
        }
        previous = value;
    }
    Estimate {
        value,
        error,
        evaluations,
    }
}

#[derive(Debug, Clone, Copy)]
struct EsNode {
    offset: f64,
    weight: f64,
}

fn exp_sinh_table() -> &'static [Vec<EsNode>] {
    static TABLE: OnceLock<Vec<Vec<EsNode>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (t_min, t_max) = (-6.0, 3.5);
        let mut levels = Vec::with_capacity(DE_LEVELS + 1);
        for level in 0..=DE_LEVELS {
            let h = 0.5f64.powi(level as i32);
            let mut nodes = Vec::new();
            let start = (t_min / h).ceil() as i64;
            let end = (t_max / h).floor() as i64;
            for k in start..=end {
                if level > 0 && k % 2 == 0 {
                    continue;
                }
                let t = k as f64 * h;
                let u = HALF_PI * t.sinh();
                let offset = u.exp();
                let weight = HALF_PI * t.cosh() * offset;
                if offset.is_finite() && offset > 0.0 {
                    nodes.push(EsNode { offset, weight });
                }
            }
            levels.push(nodes);
        }
        levels
    })
}

/// Integrates `f` over `[a, ∞)` by the exp-sinh rule. `f` receives
/// `(s, s - a)`. Suitable for integrands with exponential decay.
pub fn exp_sinh<F>(mut f: F, a: f64, tol: f64) -> Estimate
where
    F: FnMut(f64, f64) -> f64,
{
    let table = exp_sinh_table();
    let mut sum = 0.0;
    let mut evaluations = 0;
    let mut previous = f64::NAN;
    let mut error = f64::INFINITY;
    let mut value = 0.0;
    for (level, nodes) in table.iter().enumerate() {
        for n in nodes {
            let v = f(a + n.offset, n.offset);
            evaluations += 1;
            if v.is_finite() {
                sum += n.weight * v;
            }
        }
        let h = 0.5f64.powi(level as i32);
        value = h * sum;
        if level >= 3 {
            error = (value - previous).abs();
            if error <= tol * value.abs() || error <= f64::MIN_POSITIVE {
                break;
            }
        }
        previous = value;
    }
    Estimate {
        value,
        error,
        evaluations,
    }
}

/// Gauss-Legendre rule on `[-1, 1]`: `(nodes, weights)`, cached for `n ≤ 32`.
pub fn gauss_legendre(n: usize) -> (&'static [f64], &'static [f64]) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=32).map(legendre_rule).collect());
    assert!(
        (1..=32).contains(&n),
        "gauss_legendre supports 1..=32 points"
    );
    let (x, w) = &rules[n];
    (x, w)
}

fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    if n == 0 {
        return (x, w);
    }
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    (x, w)
}

/// Convolution kernel `k(τ)` on `τ > 0` together with its first two
/// antiderivatives vanishing at `τ = 0`: `F1' = k`, `F2' = F1`.
pub trait Kernel {
    fn k(&self, tau: f64) -> f64;
    fn f1(&self, tau: f64) -> f64;
    fn f2(&self, tau: f64) -> f64;
}

/// The Riemann-Liouville kernel `τ^{μ-1}/Γ(μ)` scaled by `scale`.
#[derive(Debug, Clone, Copy)]
pub struct PowerKernel {
    pub order: f64,
    pub scale: f64,
}

impl Kernel for PowerKernel {
    fn k(&self, tau: f64) -> f64 {
        self.scale * tau.powf(self.order - 1.0)
    }
    fn f1(&self, tau: f64) -> f64 {
        self.scale * tau.powf(self.order) / self.order
    }
    fn f2(&self, tau: f64) -> f64 {
        self.scale * tau.powf(self.order + 1.0) / (self.order * (self.order + 1.0))
    }
}

/// Hat-function weights `(A, B)` of the cell `[s0, s1]` for a target `t ≥ s1`:
/// `∫_{s0}^{s1} k(t-s) ℓ(s) ds = A ℓ(s0) + B ℓ(s1)` for every linear `ℓ`.
///
/// Cells touching or close to the target use the exact antiderivative
/// differences; distant cells, where those differences cancel, use a
/// Gauss-Legendre panel on the smooth kernel.
pub fn cell_weights<K: Kernel + ?Sized>(kernel: &K, t: f64, s0: f64, s1: f64) -> (f64, f64) {
    let h = s1 - s0;
    let d0 = t - s0;
    let d1 = t - s1;
    if d1 < h {
        let (f1_0, f2_0) = (kernel.f1(d0), kernel.f2(d0));
        let (f1_1, f2_1) = if d1 > 0.0 {
            (kernel.f1(d1), kernel.f2(d1))
        } else {
            (0.0, 0.0)
        };
        let b = (f2_0 - f2_1) / h - f1_1;
        let a = f1_0 - f1_1 - b;
        return (a, b);
    }
    let ratio = d1 / h;
    let n = if ratio >= 16.0 {
        4
    } else if ratio >= 4.0 {
        6
    } else {
        8
    };
    let (x, w) = gauss_legendre(n);
    let (mut a, mut b) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let theta = 0.5 * (1.0 + xi);
        let kv = kernel.k(d0 - theta * h) * wi * 0.5 * h;
        a += kv * (1.0 - theta);
        b += kv * theta;
    }
    (a, b)
}

/// Checks that `nodes` is strictly increasing with finite entries.
pub(crate) fn check_nodes(op: &'static str, nodes: &[f64]) -> Result<()> {
    if nodes.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain {
            op,
            detail: "non-finite node".into(),
        });
    }
    if let Some(w) = nodes.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Domain {
            op,
            detail: format!("nodes not strictly increasing at {} -> {}", w[0], w[1]),
        });
    }
    Ok(())
}
