//! The resolvent families `Q(t)`, `P_μ(t)` and `S_{μ,ν}(t)` of a diagonal
//! generator, acting on coefficient vectors in its eigenbasis.
//!
//! On a mode with eigenvalue `a ≤ 0`:
//!
//! | family        | factor                          |
//! |---------------|---------------------------------|
//! | `Q(t)`        | `e^{at}`                        |
//! | `P_μ(t)`      | `E_{μ,μ}(a t^μ)`                |
//! | `S_{μ,ν}(t)`  | `t^{λ-1} E_{μ,λ}(a t^μ)`        |
//!
//! `P_μ` also has a second, independent evaluation path: the `ξ_μ`-average
//! of the semigroup, used as an oracle for the closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::{gamma, mittag_leffler, xi_expectation, HilferParams};

/// Coefficients of a state in the eigenbasis of the generator.
pub type StateVector = Vec<f64>;

/// Diagonal generator with nonpositive eigenvalues sorted toward `-∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGenerator {
    eigenvalues: Vec<f64>,
}

impl SpectralGenerator {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(domain("SpectralGenerator", "need at least one mode"));
        }
        if eigenvalues.iter().any(|a| !(a.is_finite() && *a <= 0.0)) {
            return Err(domain(
                "SpectralGenerator",
                "eigenvalues must be finite and ≤ 0",
            ));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(domain(
                "SpectralGenerator",
                "eigenvalues must be sorted descending",
            ));
        }
        Ok(Self { eigenvalues })
    }

    /// The Dirichlet Laplacian on `(0, π)` truncated to `k = 1..=modes`: `a_k = -k²`.
    pub fn dirichlet_laplacian(modes: usize) -> Result<Self> {
        Self::new((1..=modes).map(|k| -((k * k) as f64)).collect())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `M = sup_t ‖Q(t)‖`, which is 1 for a nonpositive spectrum.
    pub fn semigroup_bound(&self) -> f64 {
        1.0
    }

    fn check(&self, op: &'static str, x: &[f64]) -> Result<()> {
        if x.len() != self.mode_count() {
            return Err(domain(
                op,
                format!(
                    "state has {} coefficients, generator has {} modes",
                    x.len(),
                    self.mode_count()
                ),
            ));
        }
        Ok(())
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `Q(t)x`.
///
/// ```
/// use hilfer_relax::operators::{semigroup_apply, SpectralGenerator};
/// let gen = SpectralGenerator::new(vec![-1.0]).unwrap();
/// let y = semigroup_apply(&gen, 1.0, &[1.0]).unwrap();
/// assert!((y[0] - (-1f64).exp()).abs() < 1e-16);
/// ```
pub fn semigroup_apply(gen: &SpectralGenerator, t: f64, x: &[f64]) -> Result<StateVector> {
    gen.check("semigroup_apply", x)?;
    if !(t >= 0.0) {
        return Err(domain("semigroup_apply", format!("t must be ≥ 0, got {t}")));
    }
    Ok(gen
        .eigenvalues
        .iter()
        .zip(x)
        .map(|(a, v)| (a * t).exp() * v)
        .collect())
}

/// `P_μ(t)x` through the closed spectral form `E_{μ,μ}(a t^μ)`.
pub fn p_mu_apply(
    gen: &SpectralGenerator,
    params: &HilferParams,
    t: f64,
    x: &[f64],
) -> Result<StateVector> {
    gen.check("p_mu_apply", x)?;
    positive_time("p_mu_apply", t)?;
    let mu = params.mu();
    let tm = t.powf(mu);
    let out = gen
        .eigenvalues
        .iter()
        .zip(x)
        .map(|(a, v)| Ok(mittag_leffler(mu, mu, a * tm)? * v))
        .collect::<Result<StateVector>>()?;
    debug_assert!(
        norm(&out) <= gen.semigroup_bound() / gamma(mu)? * norm(x) * (1.0 + 1e-12),
        "P_μ bound violated"
    );
    Ok(out)
}

/// `P_μ(t)x = ∫_0^∞ μθ ξ_μ(θ) Q(t^μ θ)x dθ`, evaluated by double-exponential
/// quadrature against the semigroup.
pub fn p_mu_apply_quadrature(
    gen: &SpectralGenerator,
    params: &HilferParams,
    t: f64,
    x: &[f64],
) -> Result<StateVector> {
    gen.check("p_mu_apply_quadrature", x)?;
    positive_time("p_mu_apply_quadrature", t)?;
    let mu = params.mu();
    let tm = t.powf(mu);
    gen.eigenvalues
        .iter()
        .zip(x)
        .map(|(a, v)| {
            let est = xi_expectation(mu, |theta| mu * theta * (a * tm * theta).exp(), 1e-12)?;
            Ok(est.value * v)
        })
        .collect()
}

/// `S_{μ,ν}(t)x` through `t^{λ-1} E_{μ,λ}(a t^μ)`.
pub fn s_mu_nu_apply(
    gen: &SpectralGenerator,
    params: &HilferParams,
    t: f64,
    x: &[f64],
) -> Result<StateVector> {
    gen.check("s_mu_nu_apply", x)?;
    positive_time("s_mu_nu_apply", t)?;
    let (mu, lambda) = (params.mu(), params.lambda());
    let tm = t.powf(mu);
    let w = t.powf(lambda - 1.0);
    let out = gen
        .eigenvalues
        .iter()
        .zip(x)
        .map(|(a, v)| Ok(w * mittag_leffler(mu, lambda, a * tm)? * v))
        .collect::<Result<StateVector>>()?;
    debug_assert!(
        norm(&out) <= gen.semigroup_bound() * w / gamma(lambda)? * norm(x) * (1.0 + 1e-12),
        "S_μ,ν bound violated"
    );
    Ok(out)
}

/// Which family a continuity probe examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    P,
    S,
}

/// `max ‖op(t')x - op(t'')x‖` over the given pairs.
pub fn strong_continuity_probe(
    gen: &SpectralGenerator,
    params: &HilferParams,
    family: Family,
    x: &[f64],
    pairs: &[(f64, f64)],
) -> Result<f64> {
    let apply = |t: f64| match family {
        Family::P => p_mu_apply(gen, params, t, x),
        Family::S => s_mu_nu_apply(gen, params, t, x),
    };
    let mut worst = 0.0f64;
    for &(a, b) in pairs {
        if !(a > 0.0 && a <= b) {
            return Err(domain(
                "strong_continuity_probe",
                format!("need 0 < t' ≤ t'', got ({a}, {b})"),
            ));
        }
        if a == b {
            continue;
        }
        let (ya, yb) = (apply(a)?, apply(b)?);
        let d = ya
            .iter()
            .zip(&yb)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

fn positive_time(op: &'static str, t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("t must be positive, got {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;
    use crate::specfun::{rgamma, rl_integral, SampledFunction};

    fn params(mu: f64, nu: f64) -> HilferParams {
        HilferParams::new(mu, nu).unwrap()
    }

    #[test]
    fn semigroup_identity_and_contraction() {
        let gen = SpectralGenerator::dirichlet_laplacian(4).unwrap();
        let x = vec![1.0, -2.0, 0.5, 3.0];
        assert_eq!(semigroup_apply(&gen, 0.0, &x).unwrap(), x);
        for &t in &[0.01, 0.3, 2.0] {
            assert!(norm(&semigroup_apply(&gen, t, &x).unwrap()) <= norm(&x));
        }
    }

    #[test]
    fn zero_modes_give_reciprocal_gamma() {
        let gen = SpectralGenerator::new(vec![0.0]).unwrap();
        let p = params(0.6, 0.3);
        let v = p_mu_apply(&gen, &p, 0.7, &[1.0]).unwrap()[0];
        assert!((v - rgamma(0.6)).abs() < 1e-14);
        let q = p_mu_apply_quadrature(&gen, &p, 0.7, &[1.0]).unwrap()[0];
        assert!((q - rgamma(0.6)).abs() < 1e-9);
    }

    #[test]
    fn spectral_and_quadrature_paths_agree() {
        let gen = SpectralGenerator::new(vec![-1.0, -4.0]).unwrap();
        for &mu in &[0.4, 0.6, 0.8] {
            for &t in &[0.1, 1.0] {
                let p = params(mu, 0.5);
                let a = p_mu_apply(&gen, &p, t, &[1.0, 1.0]).unwrap();
                let b = p_mu_apply_quadrature(&gen, &p, t, &[1.0, 1.0]).unwrap();
                for (u, v) in a.iter().zip(&b) {
                    assert!(
                        (u - v).abs() <= 1e-6 * (1.0 + u.abs()),
                        "μ={mu} t={t}: {u} vs {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn s_reduces_at_type_extremes() {
        let gen = SpectralGenerator::new(vec![-2.0]).unwrap();
        let t: f64 = 0.8;
        let caputo = s_mu_nu_apply(&gen, &params(0.5, 1.0), t, &[1.0]).unwrap()[0];
        assert!((caputo - mittag_leffler(0.5, 1.0, -2.0 * t.sqrt()).unwrap()).abs() < 1e-15);
        let rl = s_mu_nu_apply(&gen, &params(0.5, 0.0), t, &[1.0]).unwrap()[0];
        let kernel = t.powf(-0.5) * p_mu_apply(&gen, &params(0.5, 0.0), t, &[1.0]).unwrap()[0];
        assert!((rl - kernel).abs() < 1e-15);
    }

    /// `S_{μ,ν}(t) = I^{ν(1-μ)} [s^{μ-1} P_μ(s)](t)` checked against the closed form.
    #[test]
    fn s_closed_form_matches_fractional_integral() {
        let (mu, nu, a) = (0.5, 0.6, -3.0);
        let p = params(mu, nu);
        let alpha = p.smoothing_order();
        let kernel = |s: f64| s.powf(mu - 1.0) * mittag_leffler(mu, mu, a * s.powf(mu)).unwrap();
        let gen = SpectralGenerator::new(vec![a]).unwrap();
        // tanh-sinh handles both endpoint singularities
        for j in 1..=20 {
            let t = j as f64 / 20.0;
            let est = tanh_sinh(|_, dl, dr| dr.powf(alpha - 1.0) * kernel(dl), 0.0, t, 1e-13);
            let want = s_mu_nu_apply(&gen, &p, t, &[1.0]).unwrap()[0];
            assert!(
                (est.value * rgamma(alpha) - want).abs() < 1e-9 * want.abs(),
                "t={t}"
            );
        }
        // product integration of the sampled kernel on a steeply graded mesh
        let n = 4000;
        let nodes: Vec<f64> = (0..=n).map(|j| (j as f64 / n as f64).powi(8)).collect();
        let f =
            SampledFunction::from_fn(nodes, |s| if s == 0.0 { 0.0 } else { kernel(s) }).unwrap();
        let g = rl_integral(&f, alpha).unwrap();
        let mut checked = 0;
        for (t, v) in g.nodes().iter().zip(g.values()) {
            if *t < 0.05 {
                continue;
            }
            let want = s_mu_nu_apply(&gen, &p, *t, &[1.0]).unwrap()[0];
            assert!(
                (v - want).abs() < 1e-5 * want.abs().max(1.0),
                "t={t}: {v} vs {want}"
            );
            checked += 1;
        }
        assert!(checked >= 20);
    }

    #[test]
    fn continuity_probe_shrinks_with_gap() {
        let gen = SpectralGenerator::new(vec![-1.0]).unwrap();
        let p = params(0.5, 0.5);
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let gap = 0.1 / 2f64.powi(k);
            let d =
                strong_continuity_probe(&gen, &p, Family::S, &[1.0], &[(1.0 - gap, 1.0)]).unwrap();
            assert!(d <= prev * 1.05);
            prev = d;
        }
        let d = strong_continuity_probe(&gen, &p, Family::S, &[1.0], &[(0.999, 1.0)]).unwrap();
        assert!(d <= 1e-2);
        assert_eq!(
            strong_continuity_probe(&gen, &p, Family::P, &[1.0], &[(0.5, 0.5)]).unwrap(),
            0.0
        );
    }

    #[test]
    fn generator_validation() {
        assert!(SpectralGenerator::new(vec![-1.0, 0.5]).is_err());
        assert!(SpectralGenerator::new(vec![-4.0, -1.0]).is_err());
        assert!(SpectralGenerator::new(vec![]).is_err());
        let gen = SpectralGenerator::dirichlet_laplacian(3).unwrap();
        assert_eq!(gen.eigenvalues(), &[-1.0, -4.0, -9.0]);
        assert!(semigroup_apply(&gen, 1.0, &[1.0]).is_err());
    }
}
