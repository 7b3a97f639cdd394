//! The Picard solver against closed forms and against the equivalent
//! Volterra equation in which the generator sits inside the integral.

use std::sync::Arc;

use hilfer_relax::mild::{
    picard_solve, Alpha, ConstantJump, FixedControl, FnNonlinearity, GrowthBound, Impulse,
    ImpulseSchedule, MeshSpec, Nonlinearity, SpectralProblem, ZeroNonlinearity,
};
use hilfer_relax::operators::SpectralGenerator;
use hilfer_relax::quad::tanh_sinh;
use hilfer_relax::specfun::{mittag_leffler, rgamma};
use hilfer_relax::HilferParams;

fn scalar(
    mu: f64,
    nu: f64,
    a: f64,
    g: Arc<dyn Nonlinearity>,
    impulses: ImpulseSchedule,
) -> SpectralProblem {
    let params = HilferParams::new(mu, nu).unwrap();
    let gen = SpectralGenerator::new(vec![a]).unwrap();
    SpectralProblem::new(gen, params, vec![1.0], 1.0, impulses, g, 4.0 / mu).unwrap()
}

#[test]
fn free_solution_matches_closed_form() {
    let mut worst = 0.0f64;
    for &mu in &[0.3, 0.5, 0.7] {
        for &nu in &[0.0, 0.5, 1.0] {
            for &a in &[-1.0, -4.0] {
                let prob = scalar(
                    mu,
                    nu,
                    a,
                    Arc::new(ZeroNonlinearity),
                    ImpulseSchedule::none(),
                );
                let lambda = prob.params.lambda();
                let rhs = FixedControl {
                    problem: &prob,
                    eta: 0.0,
                };
                let traj = picard_solve(&prob, &rhs, &MeshSpec::default()).unwrap();
                for (n, node) in traj.mesh().nodes().iter().enumerate() {
                    let want = mittag_leffler(mu, lambda, a * node.t.powf(mu)).unwrap();
                    worst = worst.max((traj.y(n)[0] - want).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-6, "worst pc error {worst:e}");
}

/// The closed form satisfies `x = x₀ t^{λ-1}/Γ(λ) + I^μ(a x)` (generator inside the integral).
#[test]
fn closed_form_solves_volterra_equation() {
    for &(mu, nu, a) in &[
        (0.3, 0.5, -1.0),
        (0.5, 0.0, -4.0),
        (0.7, 1.0, -4.0),
        (0.5, 0.8, -1.0),
    ] {
        let lambda = mu + nu - mu * nu;
        let x = |s: f64| s.powf(lambda - 1.0) * mittag_leffler(mu, lambda, a * s.powf(mu)).unwrap();
        for &t in &[0.1, 0.5, 1.0] {
            let integral =
                tanh_sinh(|_, dl, dr| dr.powf(mu - 1.0) * a * x(dl), 0.0, t, 1e-12).value;
            let rhs = t.powf(lambda - 1.0) * rgamma(lambda) + rgamma(mu) * integral;
            let residual = (x(t) - rhs).abs() * t.powf(1.0 - lambda);
            assert!(residual <= 1e-6, "μ={mu} ν={nu} a={a} t={t}: {residual:e}");
        }
    }
}

/// A nonlinear solve re-substituted into the Volterra form with the generator inside;
/// the residual is discretization error and must shrink under refinement.
#[test]
fn nonlinear_solve_has_small_volterra_residual() {
    let (mu, nu, a) = (0.5, 0.8, -2.0);
    let g = FnNonlinearity::new(
        |at, _, out: &mut [f64]| out[0] = -0.5 * at.y[0].tanh() + 0.3,
        0.5,
        GrowthBound {
            alpha: Alpha::Constant(0.3),
            beta: 0.5,
        },
    )
    .control_free();
    let prob = scalar(mu, nu, a, Arc::new(g), ImpulseSchedule::none());
    let lambda = prob.params.lambda();
    let rhs = FixedControl {
        problem: &prob,
        eta: 0.0,
    };
    let mut residuals = Vec::new();
    for n in [64usize, 256, 1024] {
        let traj = picard_solve(&prob, &rhs, &MeshSpec::with_nodes(n)).unwrap();
        let nodes = traj.mesh().nodes();
        let y = |s: f64| {
            let mut out = [0.0];
            traj.y_at(0, s, &mut out);
            out[0]
        };
        let mut worst = 0.0f64;
        for &i in &[n / 8, n / 4, n / 2, 3 * n / 4, n] {
            let t = nodes[i].t;
            // a x + g with x = s^{λ-1} y, integrated cell by cell
            let integral: f64 = (0..i)
                .map(|j| {
                    tanh_sinh(
                        |s, _, _| {
                            (t - s).powf(mu - 1.0)
                                * (a * s.powf(lambda - 1.0) * y(s) - 0.5 * y(s).tanh() + 0.3)
                        },
                        nodes[j].t,
                        nodes[j + 1].t,
                        1e-12,
                    )
                    .value
                })
                .sum();
            let want = t.powf(lambda - 1.0) * rgamma(lambda) + rgamma(mu) * integral;
            worst = worst.max((y(t) - t.powf(1.0 - lambda) * want).abs());
        }
        residuals.push(worst);
    }
    assert!(
        residuals.windows(2).all(|w| w[1] < 0.25 * w[0]),
        "{residuals:?}"
    );
    assert!(residuals[2] <= 1e-4, "{residuals:?}");
}

#[test]
fn constant_jump_adds_resolvent_term() {
    let (mu, nu, a, c) = (0.5, 0.5, -1.0, 0.3);
    let jump = Impulse {
        time: 0.5,
        map: Arc::new(ConstantJump(vec![c])),
        lipschitz: 0.0,
    };
    let prob = scalar(
        mu,
        nu,
        a,
        Arc::new(ZeroNonlinearity),
        ImpulseSchedule::new(vec![jump], 1.0).unwrap(),
    );
    let lambda = prob.params.lambda();
    let rhs = FixedControl {
        problem: &prob,
        eta: 0.0,
    };
    let traj = picard_solve(&prob, &rhs, &MeshSpec::default()).unwrap();
    for (n, node) in traj.mesh().nodes().iter().enumerate() {
        if node.interval == 0 {
            continue;
        }
        let s = |tau: f64| {
            tau.powf(lambda - 1.0) * mittag_leffler(mu, lambda, a * tau.powf(mu)).unwrap()
        };
        let tau = node.t - 0.5;
        let jump_part = if tau == 0.0 {
            c * rgamma(lambda)
        } else {
            node.weight * c * s(tau)
        };
        let want = node.weight * s(node.t) + jump_part;
        assert!((traj.y(n)[0] - want).abs() < 1e-12, "t={}", node.t);
    }
}

#[test]
fn classical_limit_is_exponential() {
    let prob = scalar(
        1.0,
        1.0,
        -1.0,
        Arc::new(ZeroNonlinearity),
        ImpulseSchedule::none(),
    );
    let rhs = FixedControl {
        problem: &prob,
        eta: 0.0,
    };
    let traj = picard_solve(&prob, &rhs, &MeshSpec::default()).unwrap();
    for (n, node) in traj.mesh().nodes().iter().enumerate() {
        assert!((traj.y(n)[0] - (-node.t).exp()).abs() < 1e-8);
    }
}
