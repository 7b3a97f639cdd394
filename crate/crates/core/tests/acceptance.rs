//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hilfer_relax::mild::MeshSpec;
use hilfer_relax::optimal::Ledger;
use hilfer_relax::scenario::{ImpulseConfig, InitialConfig, ScenarioConfig};
use hilfer_relax::verify::{
    batch_sweep, benchmark_trajectories, caputo_reduction, chattering_study, classical_reduction,
    closed_form_suite, operator_suite, relaxation_ledger, relaxation_study, special_function_suite,
    xi_suite, SWEEP_MU, SWEEP_NU,
};
use hilfer_relax::{Error, Result};

/// Outcome of one criterion: its ledger and an optional wall-clock limit.
struct Outcome {
    ledger: Ledger,
    limit: Option<Duration>,
}

fn within(ledger: Ledger, seconds: u64) -> Result<Outcome> {
    Ok(Outcome {
        ledger,
        limit: Some(Duration::from_secs(seconds)),
    })
}

fn untimed(ledger: Ledger) -> Result<Outcome> {
    Ok(Outcome {
        ledger,
        limit: None,
    })
}

fn scenario(json: &str) -> Result<hilfer_relax::scenario::Scenario> {
    ScenarioConfig::from_json(json)?.build()
}

fn special_functions() -> Result<Outcome> {
    within(special_function_suite()?, 1)
}

fn xi_identities() -> Result<Outcome> {
    within(xi_suite()?, 10)
}

fn operator_bounds() -> Result<Outcome> {
    within(operator_suite(16, 100, 7)?, 30)
}

fn closed_form() -> Result<Outcome> {
    within(closed_form_suite(&MeshSpec::default())?, 60)
}

fn contraction() -> Result<Outcome> {
    let sc = scenario(r#"{"schema": 1}"#)?;
    let (mut ledger, trajs) = benchmark_trajectories(&sc, sc.config.search.n_cells)?;
    for (name, traj) in &trajs {
        let last = traj
            .diagnostics()
            .updates
            .last()
            .copied()
            .unwrap_or(f64::INFINITY);
        ledger.at_most(
            "stop rule",
            last,
            1e-10,
            format!("{name}: final weighted-norm update"),
        );
    }
    untimed(ledger)
}

fn bound_compliance() -> Result<Outcome> {
    let mut ledger = Ledger::default();
    for (row, rows_ledger) in batch_sweep(&ScenarioConfig::default(), &SWEEP_MU, &SWEEP_NU)? {
        ledger.at_most(
            "batch violations",
            row.violations as f64,
            0.0,
            format!(
                "μ = {}, ν = {}: {} trajectories, sup {:.4}/{:.4} against D₁ {:.4}, D₂ {:.4}",
                row.mu, row.nu, row.trajectories, row.sup_pre, row.sup_post, row.d1, row.d2
            ),
        );
        ledger.extend(rows_ledger);
    }
    untimed(ledger)
}

fn approximation() -> Result<Outcome> {
    let sc = scenario(r#"{"schema": 1}"#)?;
    within(chattering_study(&sc, 128)?.0, 600)
}

fn relaxation() -> Result<Outcome> {
    let mut ledger = Ledger::default();
    let bolza = ScenarioConfig {
        name: "heat from rest".into(),
        initial: InitialConfig::Parabola { amplitude: 0.0 },
        ..ScenarioConfig::default()
    };
    for config in [ScenarioConfig::default(), bolza] {
        let reports = relaxation_study(&config.build()?, &[2, 4, 8])?;
        for r in &reports {
            println!(
                "  {} P = {}: m_o = {:.10} m_r = {:.10} gap = {:.3e}",
                config.name, r.search.pieces, r.m_o, r.m_r, r.gap
            );
        }
        ledger.extend(relaxation_ledger(&reports, 1e-8));
    }
    within(ledger, 1800)
}

fn reductions() -> Result<Outcome> {
    let mut ledger = Ledger::default();
    for mu in [0.5, 0.999] {
        let sc = scenario(&format!(r#"{{"schema": 1, "mu": {mu}, "nu": 1.0}}"#))?;
        ledger.extend(caputo_reduction(&sc, 4)?);
    }
    let sc = scenario(r#"{"schema": 1, "mu": 1.0, "nu": 1.0}"#)?;
    ledger.extend(classical_reduction(&sc, 4096)?);
    untimed(ledger)
}

/// Builds `config`, expecting rejection under `clause`.
fn rejected(ledger: &mut Ledger, config: &ScenarioConfig, clause: &str, label: &str) {
    let named = match config.build() {
        Err(Error::Hypothesis { clause: got, .. }) => got,
        Err(e) => format!("other error: {e}"),
        Ok(_) => "accepted".into(),
    };
    ledger.push(
        clause,
        named == clause,
        f64::NAN,
        f64::NAN,
        format!("{label}: rejected as {named}"),
    );
}

fn negative() -> Result<Outcome> {
    let mut ledger = Ledger::default();
    let base = ScenarioConfig::default();
    let printed = base
        .validate()?
        .entries
        .iter()
        .find(|e| e.clause == "H(h)")
        .map(|e| e.bound)
        .unwrap_or(f64::NAN);
    for (h, label) in [(printed, "h at the printed bound"), (0.9, "h = 0.9")] {
        let config = ScenarioConfig {
            impulse: Some(ImpulseConfig {
                lipschitz: Some(h),
                ..ImpulseConfig::default()
            }),
            ..base.clone()
        };
        rejected(&mut ledger, &config, "H(h)", label);
    }
    for (p, label) in [(2.0, "pμ = 1"), (1.5, "pμ = 0.75")] {
        let config = ScenarioConfig {
            p: Some(p),
            ..base.clone()
        };
        rejected(&mut ledger, &config, "pμ > 1", label);
    }
    untimed(ledger)
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("special-function oracles", special_functions),
        ("ξ density identities", xi_identities),
        ("operator bounds", operator_bounds),
        ("closed-form solver oracle", closed_form),
        ("contraction certificate", contraction),
        ("a priori bound compliance", bound_compliance),
        ("approximation by chattering", approximation),
        ("relaxation gap", relaxation),
        ("reduction cross-checks", reductions),
        ("negative validation", negative),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(Outcome { ledger, limit }) => {
                let fast = limit.is_none_or(|l| elapsed <= l);
                let mut detail = format!("{} clauses", ledger.entries.len());
                if let Some(bad) = ledger.failures().next() {
                    detail = format!(
                        "{} failed: {} value {:e} bound {:e} ({})",
                        ledger.failures().count(),
                        bad.clause,
                        bad.value,
                        bad.bound,
                        bad.detail
                    );
                } else if !fast {
                    detail = format!("over the {:?} limit", limit.unwrap_or_default());
                }
                (ledger.passed() && fast, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2?}]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
