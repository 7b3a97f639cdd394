use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::operators::SpectralGenerator;
use crate::specfun::{gamma, HilferParams, SampledFunction};

/// The state at one mesh node, in both stored and physical form:
/// `y = (t - t_k)^{1-λ} x`, `weight = (t - t_k)^{1-λ}`.
#[derive(Debug, Clone, Copy)]
pub struct StatePoint<'a> {
    pub t: f64,
    pub interval: usize,
    pub weight: f64,
    pub y: &'a [f64],
}

impl StatePoint<'_> {
    /// `x = y / weight`, infinite at a left endpoint when `λ < 1`.
    pub fn x(&self) -> Vec<f64> {
        self.y.iter().map(|v| v / self.weight).collect()
    }
}

/// The controlled nonlinearity `g(t, x, η)`.
///
/// Lipschitz and growth bounds are stated in the weighted form used by the
/// solution space: `‖g(t,x₁,η) - g(t,x₂,η)‖ ≤ L (t-t_k)^{1-λ}‖x₁ - x₂‖` and
/// `‖g(t,x,η)‖ ≤ α(t) + β (t-t_k)^{1-λ}‖x‖`, i.e. in terms of `y`.
pub trait Nonlinearity: Send + Sync {
    fn eval(&self, at: &StatePoint<'_>, eta: f64, out: &mut [f64]);
    fn lipschitz(&self) -> f64;
    fn growth(&self) -> GrowthBound;
    /// Whether `η` enters at all; η-independent problems skip control work.
    fn uses_control(&self) -> bool {
        true
    }
    /// Whether `g` is affine in `η`, so that `Σ_j w_j g(η_j) = g(Σ_j w_j η_j)`.
    fn control_affine(&self) -> bool {
        false
    }
}

/// Growth envelope `α(t) + β ‖y‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBound {
    pub alpha: Alpha,
    pub beta: f64,
}

/// The `α` part of a growth envelope.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    Constant(f64),
    Sampled(SampledFunction),
}

impl Alpha {
    /// `‖α‖_{L^p(0,T)}`; sampled profiles use the trapezoid rule on `|α|^p`.
    pub fn lp_norm(&self, p: f64, horizon: f64) -> f64 {
        match self {
            Alpha::Constant(a) => a.abs() * horizon.powf(1.0 / p),
            Alpha::Sampled(f) => {
                let (t, v) = (f.nodes(), f.values());
                let s: f64 = t
                    .windows(2)
                    .zip(v.windows(2))
                    .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].abs().powf(p) + v[1].abs().powf(p)))
                    .sum();
                s.powf(1.0 / p)
            }
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Alpha::Constant(a) => a.abs(),
            Alpha::Sampled(f) => {
                let (n, v) = (f.nodes(), f.values());
                let i = n.partition_point(|&s| s < t).clamp(1, n.len() - 1);
                let w = ((t - n[i - 1]) / (n[i] - n[i - 1])).clamp(0.0, 1.0);
                ((1.0 - w) * v[i - 1] + w * v[i]).abs()
            }
        }
    }
}

/// Closure-backed nonlinearity for ad hoc problems and tests.
pub struct FnNonlinearity<F> {
    f: F,
    lipschitz: f64,
    growth: GrowthBound,
    uses_control: bool,
    affine: bool,
}

impl<F> FnNonlinearity<F>
where
    F: Fn(&StatePoint<'_>, f64, &mut [f64]) + Send + Sync,
{
    pub fn new(f: F, lipschitz: f64, growth: GrowthBound) -> Self {
        Self {
            f,
            lipschitz,
            growth,
            uses_control: true,
            affine: false,
        }
    }

    /// Marks the closure as ignoring `η`.
    pub fn control_free(mut self) -> Self {
        self.uses_control = false;
        self
    }

    /// Marks the closure as affine in `η`.
    pub fn control_affine(mut self) -> Self {
        self.affine = true;
        self
    }
}

impl<F> Nonlinearity for FnNonlinearity<F>
where
    F: Fn(&StatePoint<'_>, f64, &mut [f64]) + Send + Sync,
{
    fn eval(&self, at: &StatePoint<'_>, eta: f64, out: &mut [f64]) {
        (self.f)(at, eta, out)
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn growth(&self) -> GrowthBound {
        self.growth.clone()
    }
    fn uses_control(&self) -> bool {
        self.uses_control
    }
    fn control_affine(&self) -> bool {
        self.affine
    }
}

/// `g ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNonlinearity;

impl Nonlinearity for ZeroNonlinearity {
    fn eval(&self, _: &StatePoint<'_>, _: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    fn growth(&self) -> GrowthBound {
        GrowthBound {
            alpha: Alpha::Constant(0.0),
            beta: 0.0,
        }
    }
    fn uses_control(&self) -> bool {
        false
    }
}

/// `A x + c` per mode with `g = diag(coeffs) y + offset`, η-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNonlinearity {
    pub coeffs: Vec<f64>,
    pub offset: Vec<f64>,
}

impl Nonlinearity for LinearNonlinearity {
    fn eval(&self, at: &StatePoint<'_>, _: f64, out: &mut [f64]) {
        for (((o, c), b), y) in out.iter_mut().zip(&self.coeffs).zip(&self.offset).zip(at.y) {
            *o = c * y + b;
        }
    }
    fn lipschitz(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m: f64, c| m.max(c.abs()))
    }
    fn growth(&self) -> GrowthBound {
        GrowthBound {
            alpha: Alpha::Constant(crate::operators::norm(&self.offset)),
            beta: self.lipschitz(),
        }
    }
    fn uses_control(&self) -> bool {
        false
    }
}

/// Jump map `φ_k(x(t_k^-))`, acting on mode coefficients.
pub trait ImpulseMap: Send + Sync {
    fn apply(&self, x_left: &[f64], out: &mut [f64]);
}

/// A jump that ignores the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantJump(pub Vec<f64>);

impl ImpulseMap for ConstantJump {
    fn apply(&self, _: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

impl<F> ImpulseMap for F
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn apply(&self, x_left: &[f64], out: &mut [f64]) {
        self(x_left, out)
    }
}

/// One impulse: time, map and declared Lipschitz constant `h_k`.
#[derive(Clone)]
pub struct Impulse {
    pub time: f64,
    pub map: Arc<dyn ImpulseMap>,
    pub lipschitz: f64,
}

impl fmt::Debug for Impulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Impulse")
            .field("time", &self.time)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// Impulses at `0 < t_1 < … < t_n < T`, admissible under the jump hypothesis.
#[derive(Debug, Clone, Default)]
pub struct ImpulseSchedule {
    impulses: Vec<Impulse>,
}

/// The jump-hypothesis arithmetic for one schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpAdmissibility {
    /// `Γ(λ) / (2M Σ_{i≤k} (t_i - t_{i-1})^{λ-1})` for each `k`.
    pub bounds: Vec<f64>,
    /// `bound_k - h_k` for each `k`; all must be positive.
    pub margins: Vec<f64>,
    /// `1 - (M/Γ(λ)) Σ_i h_i (t_i - t_{i-1})^{λ-1}`.
    pub w: f64,
}

impl ImpulseSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    /// Validates ordering within `(0, T)` only; see [`ImpulseSchedule::admissibility`].
    pub fn new(impulses: Vec<Impulse>, horizon: f64) -> Result<Self> {
        let mut prev = 0.0;
        for imp in &impulses {
            if !(imp.time > prev && imp.time < horizon) {
                return Err(domain(
                    "ImpulseSchedule",
                    format!("impulse times must increase strictly inside (0, {horizon})"),
                ));
            }
            if !(imp.lipschitz >= 0.0 && imp.lipschitz.is_finite()) {
                return Err(domain(
                    "ImpulseSchedule",
                    "Lipschitz constants must be finite and ≥ 0",
                ));
            }
            prev = imp.time;
        }
        Ok(Self { impulses })
    }

    pub fn impulses(&self) -> &[Impulse] {
        &self.impulses
    }

    pub fn len(&self) -> usize {
        self.impulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.impulses.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.impulses.iter().map(|i| i.time).collect()
    }

    /// `0, t_1, …, t_n, T`.
    pub fn boundaries(&self, horizon: f64) -> Vec<f64> {
        let mut b = vec![0.0];
        b.extend(self.times());
        b.push(horizon);
        b
    }

    /// The bounds behind the jump hypothesis for semigroup bound `m`.
    pub fn admissibility(&self, lambda: f64, m: f64) -> Result<JumpAdmissibility> {
        let g = gamma(lambda)?;
        let mut prev = 0.0;
        let mut sum = 0.0;
        let mut weighted = 0.0;
        let mut bounds = Vec::with_capacity(self.len());
        let mut margins = Vec::with_capacity(self.len());
        for imp in &self.impulses {
            let gap = (imp.time - prev).powf(lambda - 1.0);
            sum += gap;
            weighted += imp.lipschitz * gap;
            let bound = g / (2.0 * m * sum);
            bounds.push(bound);
            margins.push(bound - imp.lipschitz);
            prev = imp.time;
        }
        Ok(JumpAdmissibility {
            bounds,
            margins,
            w: 1.0 - m / g * weighted,
        })
    }

    /// Fails with the clause name when any `h_k` reaches its bound or `w ≤ 0`.
    pub fn check(&self, lambda: f64, m: f64) -> Result<JumpAdmissibility> {
        let adm = self.admissibility(lambda, m)?;
        if let Some((k, margin)) = adm.margins.iter().enumerate().find(|(_, m)| **m <= 0.0) {
            return Err(Error::Hypothesis {
                clause: "H(h)".into(),
                detail: format!(
                    "impulse {}: h = {} is not below the bound {} (margin {margin:.6})",
                    k + 1,
                    self.impulses[k].lipschitz,
                    adm.bounds[k]
                ),
            });
        }
        if adm.w <= 0.0 {
            return Err(Error::Hypothesis {
                clause: "H(h)".into(),
                detail: format!("w = {} is not positive", adm.w),
            });
        }
        Ok(adm)
    }
}

/// The full controlled, impulsive Hilfer system on a spectral basis.
#[derive(Clone)]
pub struct SpectralProblem {
    pub gen: SpectralGenerator,
    pub params: HilferParams,
    /// The weighted initial datum `I^{1-λ} x(0)`.
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub impulses: ImpulseSchedule,
    pub nonlinearity: Arc<dyn Nonlinearity>,
    /// Integrability exponent of `α`; needs `p > 1/λ` and `pμ > 1`.
    pub p: f64,
}

impl fmt::Debug for SpectralProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralProblem")
            .field("gen", &self.gen)
            .field("params", &self.params)
            .field("x0", &self.x0)
            .field("horizon", &self.horizon)
            .field("impulses", &self.impulses)
            .field("p", &self.p)
            .finish_non_exhaustive()
    }
}

impl SpectralProblem {
    /// Assembles and validates a problem; the jump hypothesis is enforced here.
    pub fn new(
        gen: SpectralGenerator,
        params: HilferParams,
        x0: Vec<f64>,
        horizon: f64,
        impulses: ImpulseSchedule,
        nonlinearity: Arc<dyn Nonlinearity>,
        p: f64,
    ) -> Result<Self> {
        if x0.len() != gen.mode_count() {
            return Err(domain(
                "SpectralProblem",
                "x0 length differs from mode count",
            ));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain("SpectralProblem", "horizon must be positive"));
        }
        if impulses
            .impulses()
            .last()
            .is_some_and(|i| i.time >= horizon)
        {
            return Err(domain("SpectralProblem", "impulse beyond the horizon"));
        }
        check_exponent(&params, p)?;
        impulses.check(params.lambda(), gen.semigroup_bound())?;
        Ok(Self {
            gen,
            params,
            x0,
            horizon,
            impulses,
            nonlinearity,
            p,
        })
    }

    pub fn modes(&self) -> usize {
        self.gen.mode_count()
    }

    pub fn boundaries(&self) -> Vec<f64> {
        self.impulses.boundaries(self.horizon)
    }

    /// The same problem with another nonlinearity.
    pub fn with_nonlinearity(&self, g: Arc<dyn Nonlinearity>) -> Self {
        Self {
            nonlinearity: g,
            ..self.clone()
        }
    }

    /// The same problem with another initial datum.
    pub fn with_x0(&self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.modes() {
            return Err(domain(
                "SpectralProblem",
                "x0 length differs from mode count",
            ));
        }
        Ok(Self { x0, ..self.clone() })
    }
}

/// `p > 1/λ` and `pμ > 1`, named after the clause they come from.
pub(crate) fn check_exponent(params: &HilferParams, p: f64) -> Result<()> {
    if !(p * params.mu() > 1.0) {
        return Err(Error::Hypothesis {
            clause: "pμ > 1".into(),
            detail: format!("p = {p}, μ = {}: pμ = {}", params.mu(), p * params.mu()),
        });
    }
    if !(p > 1.0 / params.lambda()) {
        return Err(Error::Hypothesis {
            clause: "p > 1/λ".into(),
            detail: format!("p = {p}, 1/λ = {}", 1.0 / params.lambda()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jump(time: f64, h: f64) -> Impulse {
        Impulse {
            time,
            map: Arc::new(ConstantJump(vec![0.0])),
            lipschitz: h,
        }
    }

    #[test]
    fn jump_bound_arithmetic() {
        // λ = 1, M = 1, intervals of length 1/2: bound Γ(1)/(2·1·1) = 1/2
        let s = ImpulseSchedule::new(vec![jump(0.5, 0.2)], 1.0).unwrap();
        let adm = s.check(1.0, 1.0).unwrap();
        assert!((adm.bounds[0] - 0.5).abs() < 1e-15);
        assert!((adm.margins[0] - 0.3).abs() < 1e-15);
        let bad = ImpulseSchedule::new(vec![jump(0.5, 0.6)], 1.0).unwrap();
        let adm = bad.admissibility(1.0, 1.0).unwrap();
        assert!((adm.margins[0] + 0.1).abs() < 1e-15);
        match bad.check(1.0, 1.0) {
            Err(Error::Hypothesis { clause, .. }) => assert_eq!(clause, "H(h)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schedule_rejects_disorder() {
        assert!(ImpulseSchedule::new(vec![jump(0.5, 0.1), jump(0.4, 0.1)], 1.0).is_err());
        assert!(ImpulseSchedule::new(vec![jump(1.0, 0.1)], 1.0).is_err());
    }

    #[test]
    fn exponent_clauses() {
        let p = HilferParams::new(0.5, 0.0).unwrap();
        match check_exponent(&p, 1.5) {
            Err(Error::Hypothesis { clause, .. }) => assert_eq!(clause, "pμ > 1"),
            other => panic!("{other:?}"),
        }
        assert!(check_exponent(&p, 4.0).is_ok());
    }

    #[test]
    fn sampled_alpha_norm() {
        let f = SampledFunction::from_fn(vec![0.0, 0.5, 1.0], |_| 2.0).unwrap();
        assert!((Alpha::Sampled(f).lp_norm(2.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((Alpha::Constant(2.0).lp_norm(4.0, 16.0) - 4.0).abs() < 1e-15);
    }
}
