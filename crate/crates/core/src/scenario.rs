//! The parabolic benchmark: a Hilfer heat equation on `(0, π)` with
//! Dirichlet ends, one impulse, and a controlled saturating source,
//! truncated to the first `K` sine modes.
//!
//! Pointwise maps of the physical profile (the saturating source and the
//! jump `|x|/(2+|x|)`) go through a midpoint sine grid of `Q = 4K` points
//! whose synthesis matrix is scaled to be an isometry, so a pointwise
//! 1-Lipschitz map stays 1-Lipschitz on mode vectors.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mild::{
    Alpha, FnNonlinearity, GrowthBound, Impulse, ImpulseMap, ImpulseSchedule, MeshSpec,
    Nonlinearity, PicardOptions, SpectralProblem, StatePoint, ZeroNonlinearity,
};
use crate::operators::{norm, SpectralGenerator};
use crate::optimal::{
    exponent_clauses, jump_clauses, CostIntegrand, DoubleWell, FnIntegrand, Ledger, SearchSpec,
};
use crate::relax::{ControlGrid, RelaxedControl};
use crate::specfun::HilferParams;

/// Version of the configuration schema; other values are rejected.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    pub mu: f64,
    pub nu: f64,
    pub modes: usize,
    pub horizon: f64,
    /// Integrability exponent of the growth envelope; `None` selects `2/μ`.
    pub p: Option<f64>,
    pub initial: InitialConfig,
    pub impulse: Option<ImpulseConfig>,
    pub nonlinearity: NonlinearityConfig,
    pub integrand: IntegrandConfig,
    pub control: ControlConfig,
    pub mesh: MeshSpec,
    pub search: SearchSpec,
    pub tolerances: Tolerances,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            name: "heat".into(),
            mu: 0.5,
            nu: 0.8,
            modes: 16,
            horizon: 1.0,
            p: None,
            initial: InitialConfig::default(),
            impulse: Some(ImpulseConfig::default()),
            nonlinearity: NonlinearityConfig::default(),
            integrand: IntegrandConfig::default(),
            control: ControlConfig::default(),
            mesh: MeshSpec::default(),
            search: SearchSpec::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// The weighted initial datum as a physical profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `amplitude · e_index`, `index` counted from 1.
    Mode { index: usize, amplitude: f64 },
    /// `amplitude · y(π - y)`, whose sine coefficients are `√(2/π)·4/k³` for odd `k`.
    Parabola { amplitude: f64 },
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self::Parabola { amplitude: 1.0 }
    }
}

impl InitialConfig {
    pub fn coefficients(&self, modes: usize) -> Result<Vec<f64>> {
        match *self {
            Self::Mode { index, amplitude } => {
                if index == 0 || index > modes {
                    return Err(domain(
                        "InitialConfig",
                        format!("mode index {index} outside 1..={modes}"),
                    ));
                }
                let mut x = vec![0.0; modes];
                x[index - 1] = amplitude;
                Ok(x)
            }
            Self::Parabola { amplitude } => Ok((1..=modes)
                .map(|k| {
                    if k % 2 == 1 {
                        amplitude * (2.0 / PI).sqrt() * 4.0 / (k as f64).powi(3)
                    } else {
                        0.0
                    }
                })
                .collect()),
        }
    }
}

/// The impulse `x ↦ gain · |x|/(2+|x|)` applied pointwise at `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpulseConfig {
    pub time: f64,
    pub gain: f64,
    /// Declared Lipschitz constant `h`; `None` declares the exact `gain/2`.
    pub lipschitz: Option<f64>,
}

impl Default for ImpulseConfig {
    fn default() -> Self {
        Self {
            time: 0.5,
            gain: 0.9,
            lipschitz: None,
        }
    }
}

impl ImpulseConfig {
    pub fn declared(&self) -> f64 {
        self.lipschitz.unwrap_or(0.5 * self.gain.abs())
    }
}

/// The source term `g(t, x, η)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Zero,
    /// `-κ tanh(y)` pointwise in space plus `c · η · e_1`.
    Saturating {
        damping: f64,
        coupling: f64,
    },
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self::Saturating {
            damping: 1.0,
            coupling: 0.5,
        }
    }
}

/// The running cost `𝓛(t, y, η)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandConfig {
    Zero,
    One,
    /// `𝓛 = η`.
    Eta,
    /// `𝓛 = (η - target)²`.
    Tracking {
        target: f64,
    },
    /// `𝓛 = (1 - η²)² + q‖y‖²`.
    DoubleWell {
        state_weight: f64,
    },
}

impl Default for IntegrandConfig {
    fn default() -> Self {
        Self::DoubleWell { state_weight: 1.0 }
    }
}

/// `atoms` equally spaced control values on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub lo: f64,
    pub hi: f64,
    pub atoms: usize,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            lo: -1.0,
            hi: 1.0,
            atoms: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Picard stop on the weighted-norm update.
    pub picard: f64,
    pub max_sweeps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            picard: 1e-10,
            max_sweeps: 200,
        }
    }
}

/// Midpoint sine grid: `X_q = Σ_k c_k e_k(y_q)` with `e_k = √(2/π) sin(k·)`
/// and `y_q = π(q + 1/2)/Q`, realized through an isometric synthesis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SineGrid {
    q: usize,
    modes: usize,
    /// `S[q][k] = √(2/Q) sin((k+1) y_q)`, orthonormal columns for `K < Q`.
    synth: Vec<f64>,
}

impl SineGrid {
    pub fn new(modes: usize) -> Self {
        let q = 4 * modes;
        let mut synth = vec![0.0; q * modes];
        for i in 0..q {
            let y = PI * (i as f64 + 0.5) / q as f64;
            for k in 0..modes {
                synth[i * modes + k] = (2.0 / q as f64).sqrt() * ((k + 1) as f64 * y).sin();
            }
        }
        Self { q, modes, synth }
    }

    pub fn points(&self) -> usize {
        self.q
    }

    /// Physical values at the grid points.
    pub fn to_physical(&self, c: &[f64], out: &mut [f64]) {
        let s = (self.q as f64 / PI).sqrt();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.synth[i * self.modes..(i + 1) * self.modes];
            *o = s * row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Sine coefficients of grid values by the midpoint rule.
    pub fn to_modes(&self, values: &[f64], out: &mut [f64]) {
        let s = (PI / self.q as f64).sqrt();
        out.fill(0.0);
        for (i, v) in values.iter().enumerate() {
            let row = &self.synth[i * self.modes..(i + 1) * self.modes];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * v;
            }
        }
        out.iter_mut().for_each(|o| *o *= s);
    }

    /// Coefficients of `f` applied pointwise to the physical profile of `c`.
    pub fn map_pointwise(&self, c: &[f64], f: impl Fn(f64) -> f64, out: &mut [f64]) {
        let mut x = vec![0.0; self.q];
        self.to_physical(c, &mut x);
        x.iter_mut().for_each(|v| *v = f(*v));
        self.to_modes(&x, out);
    }
}

/// The jump `gain · |x|/(2+|x|)` pointwise in space.
#[derive(Debug, Clone)]
pub struct SaturatingJump {
    pub sine: Arc<SineGrid>,
    pub gain: f64,
}

impl ImpulseMap for SaturatingJump {
    fn apply(&self, x_left: &[f64], out: &mut [f64]) {
        let gain = self.gain;
        self.sine
            .map_pointwise(x_left, |v| gain * v.abs() / (2.0 + v.abs()), out);
    }
}

/// `g(t, x, η) = -κ tanh(y) + c η e_1` with `y = (t - t_k)^{1-λ} x` pointwise in space.
fn saturating(
    sine: Arc<SineGrid>,
    damping: f64,
    coupling: f64,
    grid: &ControlGrid,
) -> impl Nonlinearity {
    let (lo, hi) = grid.bounds();
    let eta_max = lo.abs().max(hi.abs());
    FnNonlinearity::new(
        move |at: &StatePoint<'_>, eta: f64, out: &mut [f64]| {
            sine.map_pointwise(at.y, |v| -damping * v.tanh(), out);
            out[0] += coupling * eta;
        },
        damping.abs(),
        GrowthBound {
            alpha: Alpha::Constant(coupling.abs() * eta_max),
            beta: damping.abs(),
        },
    )
    .control_affine()
}

/// A built benchmark.
#[derive(Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub problem: SpectralProblem,
    pub grid: ControlGrid,
    pub integrand: Arc<dyn CostIntegrand>,
    pub options: PicardOptions,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("config", &self.config)
            .field("problem", &self.problem)
            .finish_non_exhaustive()
    }
}

impl ScenarioConfig {
    /// Parses JSON, rejecting unknown keys and foreign schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| domain("ScenarioConfig", e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(domain(
                "ScenarioConfig",
                format!(
                    "schema {} is not the supported {SCHEMA_VERSION}",
                    cfg.schema
                ),
            ));
        }
        Ok(cfg)
    }

    pub fn exponent(&self) -> f64 {
        self.p.unwrap_or(2.0 / self.mu)
    }

    /// The cross-field clauses checked before anything is built.
    pub fn validate(&self) -> Result<Ledger> {
        let params = HilferParams::new(self.mu, self.nu)?;
        let mut ledger = exponent_clauses(&params, self.exponent());
        let schedule = self.schedule(&Arc::new(SineGrid::new(self.modes.max(1))))?;
        ledger.extend(jump_clauses(&schedule, &params, 1.0));
        Ok(ledger)
    }

    fn schedule(&self, sine: &Arc<SineGrid>) -> Result<ImpulseSchedule> {
        match &self.impulse {
            None => Ok(ImpulseSchedule::none()),
            Some(imp) => ImpulseSchedule::new(
                vec![Impulse {
                    time: imp.time,
                    map: Arc::new(SaturatingJump {
                        sine: sine.clone(),
                        gain: imp.gain,
                    }),
                    lipschitz: imp.declared(),
                }],
                self.horizon,
            ),
        }
    }

    /// Validates, then assembles problem, grid and cost. A failed clause is
    /// reported by name.
    pub fn build(&self) -> Result<Scenario> {
        let ledger = self.validate()?;
        if let Some(bad) = ledger.failures().next() {
            return Err(Error::Hypothesis {
                clause: bad.clause.clone(),
                detail: format!(
                    "value {} against bound {} ({})",
                    bad.value, bad.bound, bad.detail
                ),
            });
        }
        if self.modes == 0 {
            return Err(domain("ScenarioConfig", "need at least one mode"));
        }
        let params = HilferParams::new(self.mu, self.nu)?;
        let gen = SpectralGenerator::dirichlet_laplacian(self.modes)?;
        let sine = Arc::new(SineGrid::new(self.modes));
        let grid = ControlGrid::uniform(self.control.lo, self.control.hi, self.control.atoms)?;
        let g: Arc<dyn Nonlinearity> = match self.nonlinearity {
            NonlinearityConfig::Zero => Arc::new(ZeroNonlinearity),
            NonlinearityConfig::Saturating { damping, coupling } => {
                Arc::new(saturating(sine.clone(), damping, coupling, &grid))
            }
        };
        let problem = SpectralProblem::new(
            gen,
            params,
            self.initial.coefficients(self.modes)?,
            self.horizon,
            self.schedule(&sine)?,
            g,
            self.exponent(),
        )?;
        let integrand: Arc<dyn CostIntegrand> = match self.integrand {
            IntegrandConfig::Zero => Arc::new(FnIntegrand::new(|_, _| 0.0, |_, _| 0.0)),
            IntegrandConfig::One => Arc::new(FnIntegrand::new(|_, _| 1.0, |_, _| 1.0)),
            IntegrandConfig::Eta => {
                let (lo, hi) = grid.bounds();
                let m = lo.abs().max(hi.abs());
                Arc::new(FnIntegrand::new(|_, eta| eta, move |_, _| m))
            }
            IntegrandConfig::Tracking { target } => {
                let (lo, hi) = grid.bounds();
                let m = (lo - target).powi(2).max((hi - target).powi(2));
                Arc::new(FnIntegrand::new(
                    move |_, eta| (eta - target).powi(2),
                    move |_, _| m,
                ))
            }
            IntegrandConfig::DoubleWell { state_weight } => {
                Arc::new(DoubleWell::new(state_weight, &grid))
            }
        };
        let options = PicardOptions {
            tol: self.tolerances.picard,
            max_sweeps: self.tolerances.max_sweeps,
            ..PicardOptions::default()
        };
        Ok(Scenario {
            config: self.clone(),
            problem,
            grid,
            integrand,
            options,
        })
    }
}

impl Scenario {
    /// A fixed, genuinely mixed relaxed control on four pieces, used by the
    /// chattering study; weights are dyadic so slots are exact.
    pub fn study_control(&self) -> Result<RelaxedControl> {
        let m = self.grid.len();
        let at = |eta: f64| self.grid.nearest(eta);
        let row = |parts: &[(f64, f64)]| {
            let mut r = vec![0.0; m];
            for &(eta, w) in parts {
                r[at(eta)] += w;
            }
            r
        };
        let t = self.problem.horizon;
        RelaxedControl::new(
            vec![0.0, 0.25 * t, 0.5 * t, 0.75 * t, t],
            vec![
                row(&[(-1.0, 0.5), (1.0, 0.5)]),
                row(&[(-1.0, 0.25), (0.5, 0.75)]),
                row(&[(-0.5, 0.5), (0.0, 0.25), (1.0, 0.25)]),
                row(&[(-1.0, 0.5), (0.25, 0.5)]),
            ],
        )
    }

    /// The configured mesh carrying the configured Picard stop rule.
    pub fn mesh(&self) -> MeshSpec {
        MeshSpec {
            picard: self.options,
            ..self.config.mesh.clone()
        }
    }

    /// `‖x₀‖` and the coefficient mass beyond the truncation, for the record.
    pub fn initial_norm(&self) -> f64 {
        norm(&self.problem.x0)
    }
}
