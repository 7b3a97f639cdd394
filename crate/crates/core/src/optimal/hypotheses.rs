use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mild::{ImpulseSchedule, SpectralProblem, StatePoint};
use crate::operators::norm;
use crate::relax::ControlGrid;
use crate::specfun::HilferParams;

use super::cost::CostIntegrand;

/// One checked clause: its name, the measured value, the bound it is held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub clause: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

/// Pass/fail record of every checked clause.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn push(
        &mut self,
        clause: &str,
        passed: bool,
        value: f64,
        bound: f64,
        detail: impl Into<String>,
    ) {
        self.entries.push(LedgerEntry {
            clause: clause.into(),
            passed,
            value,
            bound,
            detail: detail.into(),
        });
    }

    /// Records `value ≤ bound`.
    pub fn at_most(&mut self, clause: &str, value: f64, bound: f64, detail: impl Into<String>) {
        self.push(clause, value <= bound, value, bound, detail);
    }

    pub fn extend(&mut self, other: Ledger) {
        self.entries.extend(other.entries);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    /// One line per clause, `PASS`/`FAIL` first.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                format!(
                    "{} {:<24} value={:.6e} bound={:.6e} {}\n",
                    if e.passed { "PASS" } else { "FAIL" },
                    e.clause,
                    e.value,
                    e.bound,
                    e.detail
                )
            })
            .collect()
    }
}

/// The jump clauses `h_k < Γ(λ)/(2M Σ(t_i - t_{i-1})^{λ-1})` and `w > 0`.
pub fn jump_clauses(schedule: &ImpulseSchedule, params: &HilferParams, m: f64) -> Ledger {
    let mut ledger = Ledger::default();
    match schedule.admissibility(params.lambda(), m) {
        Ok(adm) => {
            for (k, (imp, bound)) in schedule.impulses().iter().zip(&adm.bounds).enumerate() {
                ledger.push(
                    "H(h)",
                    imp.lipschitz < *bound,
                    imp.lipschitz,
                    *bound,
                    format!("impulse {} margin {:.6}", k + 1, bound - imp.lipschitz),
                );
            }
            ledger.push("w > 0", adm.w > 0.0, adm.w, 0.0, "jump contraction weight");
        }
        Err(e) => ledger.push("H(h)", false, f64::NAN, f64::NAN, e.to_string()),
    }
    ledger
}

/// `pμ > 1` and `p > 1/λ`.
pub fn exponent_clauses(params: &HilferParams, p: f64) -> Ledger {
    let mut ledger = Ledger::default();
    ledger.push(
        "pμ > 1",
        p * params.mu() > 1.0,
        p * params.mu(),
        1.0,
        "Hölder constant is real",
    );
    ledger.push(
        "p > 1/λ",
        p > 1.0 / params.lambda(),
        p,
        1.0 / params.lambda(),
        "integrability exponent",
    );
    ledger
}

/// Number of random probes per spot check.
pub const PROBES: usize = 64;

/// All hypothesis clauses for a problem and cost: the jump and exponent
/// arithmetic, plus seeded probe checks of the declared Lipschitz, growth,
/// envelope and continuity properties.
pub fn validate_hypotheses(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    integrand: &dyn CostIntegrand,
    seed: u64,
) -> Ledger {
    let mut ledger = jump_clauses(
        &problem.impulses,
        &problem.params,
        problem.gen.semigroup_bound(),
    );
    ledger.extend(exponent_clauses(&problem.params, problem.p));
    let k = problem.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 + norm(&problem.x0);
    let vector = |rng: &mut ChaCha8Rng, r: f64| -> Vec<f64> {
        (0..k).map(|_| r * rng.random_range(-1.0..1.0)).collect()
    };
    let g = problem.nonlinearity.as_ref();
    let lam = problem.params.lambda();
    let growth = g.growth();
    let (mut lip, mut grow, mut env, mut cont) =
        (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut ga = vec![0.0; k];
    let mut gb = vec![0.0; k];
    for _ in 0..PROBES {
        let t = rng.random_range(0.0..problem.horizon);
        let interval = problem.impulses.times().partition_point(|&s| s <= t);
        let t_k = if interval == 0 {
            0.0
        } else {
            problem.impulses.times()[interval - 1]
        };
        let weight = if lam == 1.0 {
            1.0
        } else {
            (t - t_k).powf(1.0 - lam)
        };
        let eta = grid.atoms()[rng.random_range(0..grid.len())];
        let r = scale * rng.random_range(0.0..4.0);
        let ya = vector(&mut rng, r);
        let yb: Vec<f64> = ya
            .iter()
            .map(|v| v + 0.1 * scale * rng.random_range(-1.0..1.0))
            .collect();
        let at = |y| StatePoint {
            t,
            interval,
            weight,
            y,
        };
        g.eval(&at(&ya), eta, &mut ga);
        g.eval(&at(&yb), eta, &mut gb);
        let diff: Vec<f64> = ga.iter().zip(&gb).map(|(a, b)| a - b).collect();
        let dy: Vec<f64> = ya.iter().zip(&yb).map(|(a, b)| a - b).collect();
        if norm(&dy) > 0.0 {
            lip = lip.max(norm(&diff) / norm(&dy));
        }
        grow = grow.max(norm(&ga) - (growth.alpha.at(t) + growth.beta * norm(&ya)));
        let l = integrand.eval(&at(&ya), eta);
        env = env.max(l.abs() - integrand.envelope(norm(&ya), t));
        // continuity: the change under a 1e-6 perturbation of (y, η), relative to the value
        let yc: Vec<f64> = ya.iter().map(|v| v + 1e-6 * scale).collect();
        let lc = integrand.eval(&at(&yc), eta + 1e-6);
        cont = cont.max((lc - l).abs() / (1.0 + l.abs()));
    }
    let declared = g.lipschitz();
    ledger.at_most(
        "H(g) Lipschitz",
        lip,
        declared * (1.0 + 1e-9) + 1e-15,
        "probe ratio vs declared L",
    );
    ledger.at_most(
        "H(g) growth",
        grow,
        1e-12 * scale,
        "max of ‖g‖ - α(t) - β‖y‖",
    );
    ledger.at_most("H(L) envelope", env, 1e-12, "max of |𝓛| - 𝔟_r(t)");
    ledger.at_most(
        "H(L) continuity",
        cont,
        1e-3,
        "relative change under 1e-6 perturbation",
    );
    for (i, imp) in problem.impulses.impulses().iter().enumerate() {
        let mut worst = 0.0f64;
        let mut pa = vec![0.0; k];
        let mut pb = vec![0.0; k];
        for _ in 0..PROBES {
            let r = scale * rng.random_range(0.0..4.0);
            let xa = vector(&mut rng, r);
            let xb: Vec<f64> = xa
                .iter()
                .map(|v| v + 0.1 * scale * rng.random_range(-1.0..1.0))
                .collect();
            imp.map.apply(&xa, &mut pa);
            imp.map.apply(&xb, &mut pb);
            let d: Vec<f64> = pa.iter().zip(&pb).map(|(a, b)| a - b).collect();
            let dx: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| a - b).collect();
            if norm(&dx) > 0.0 {
                worst = worst.max(norm(&d) / norm(&dx));
            }
        }
        ledger.at_most(
            "H(h) Lipschitz",
            worst,
            imp.lipschitz * (1.0 + 1e-9) + 1e-15,
            format!("impulse {} probe ratio vs declared h", i + 1),
        );
    }
    ledger
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mild::{ConstantJump, Impulse};

    fn schedule(h: f64) -> ImpulseSchedule {
        let imp = Impulse {
            time: 0.5,
            map: Arc::new(ConstantJump(vec![0.0])),
            lipschitz: h,
        };
        ImpulseSchedule::new(vec![imp], 1.0).unwrap()
    }

    #[test]
    fn jump_bound_arithmetic() {
        let params = HilferParams::new(1.0, 1.0).unwrap();
        let ok = jump_clauses(&schedule(0.2), &params, 1.0);
        assert!(ok.passed());
        assert!((ok.entries[0].bound - 0.5).abs() < 1e-15);
        let bad = jump_clauses(&schedule(0.6), &params, 1.0);
        assert!(!bad.passed());
        let e = bad.failures().next().unwrap();
        assert_eq!(e.clause, "H(h)");
        assert!((e.bound - e.value + 0.1).abs() < 1e-12);
    }

    #[test]
    fn exponent_clauses_name_the_failure() {
        let params = HilferParams::new(0.5, 0.5).unwrap();
        let l = exponent_clauses(&params, 1.5);
        assert_eq!(
            l.failures().map(|e| e.clause.as_str()).collect::<Vec<_>>(),
            vec!["pμ > 1"]
        );
        assert!(exponent_clauses(&params, 4.0).passed());
    }
}
