//! The independent integrators against closed forms, and the solver against them.

use std::sync::Arc;

use hilfer_relax::crosscheck::{caputo_predictor_corrector, rk4_impulsive};
use hilfer_relax::mild::{
    ConstantJump, FixedControl, Impulse, ImpulseSchedule, SpectralProblem, ZeroNonlinearity,
};
use hilfer_relax::operators::SpectralGenerator;
use hilfer_relax::scenario::ScenarioConfig;
use hilfer_relax::specfun::mittag_leffler;
use hilfer_relax::verify::{caputo_reduction, classical_reduction};
use hilfer_relax::HilferParams;

fn scalar(mu: f64, nu: f64, a: f64, impulses: ImpulseSchedule) -> SpectralProblem {
    SpectralProblem::new(
        SpectralGenerator::new(vec![a]).unwrap(),
        HilferParams::new(mu, nu).unwrap(),
        vec![1.0],
        1.0,
        impulses,
        Arc::new(ZeroNonlinearity),
        4.0 / mu,
    )
    .unwrap()
}

#[test]
fn predictor_corrector_converges_to_the_caputo_closed_form() {
    let (mu, a) = (0.6, -2.0);
    let problem = scalar(mu, 1.0, a, ImpulseSchedule::none());
    let rhs = FixedControl {
        problem: &problem,
        eta: 0.0,
    };
    let errors: Vec<f64> = [64usize, 256]
        .iter()
        .map(|&n| {
            let sol = caputo_predictor_corrector(&problem, &rhs, n, 1.0 / mu).unwrap();
            sol.times
                .iter()
                .zip(&sol.left)
                .map(|(t, x)| (x[0] - mittag_leffler(mu, 1.0, a * t.powf(mu)).unwrap()).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errors[1] < errors[0] / 8.0, "{errors:?}");
    assert!(errors[1] < 1e-5, "{errors:?}");
}

#[test]
fn rk4_matches_the_exponential_across_a_constant_jump() {
    let jump = Impulse {
        time: 0.5,
        map: Arc::new(ConstantJump(vec![0.25])),
        lipschitz: 0.0,
    };
    let problem = scalar(
        1.0,
        1.0,
        -1.0,
        ImpulseSchedule::new(vec![jump], 1.0).unwrap(),
    );
    let rhs = FixedControl {
        problem: &problem,
        eta: 0.0,
    };
    let sol = rk4_impulsive(&problem, &rhs, 256).unwrap();
    for (i, &t) in sol.times.iter().enumerate() {
        let want = |t: f64, after: bool| {
            (-t).exp()
                + if after {
                    0.25 * (-(t - 0.5)).exp()
                } else {
                    0.0
                }
        };
        assert!((sol.left[i][0] - want(t, t > 0.5)).abs() < 1e-11, "t = {t}");
        assert!(
            (sol.right[i][0] - want(t, t >= 0.5)).abs() < 1e-11,
            "t = {t}"
        );
    }
}

#[test]
fn reductions_refuse_other_types() {
    let problem = scalar(0.5, 0.5, -1.0, ImpulseSchedule::none());
    let rhs = FixedControl {
        problem: &problem,
        eta: 0.0,
    };
    assert!(caputo_predictor_corrector(&problem, &rhs, 8, 2.0).is_err());
    assert!(rk4_impulsive(&problem, &rhs, 8).is_err());
}

#[test]
fn benchmark_reductions_pass() {
    let small = |mu: f64| {
        ScenarioConfig {
            mu,
            nu: 1.0,
            modes: 8,
            ..ScenarioConfig::default()
        }
        .build()
        .unwrap()
    };
    let l = caputo_reduction(&small(0.7), 4).unwrap();
    assert!(l.passed(), "{}", l.render());
    let l = classical_reduction(&small(1.0), 2048).unwrap();
    assert!(l.passed(), "{}", l.render());
}
