//! Properties of controls, chattering, costs and the two minimizations.

use proptest::prelude::*;

use hilfer_relax::mild::MeshSpec;
use hilfer_relax::optimal::{
    cost_ordinary, cost_relaxed, minimize_ordinary, relaxation_report, FnIntegrand, SearchSpec,
};
use hilfer_relax::relax::{
    chattering_approximate, embed_dirac, solve_ordinary, solve_relaxed, uniform_breakpoints,
    weak_star_gap, ControlGrid, OrdinaryControl, RelaxedControl, TestFamily,
};
use hilfer_relax::scenario::{
    ControlConfig, IntegrandConfig, NonlinearityConfig, Scenario, ScenarioConfig,
};

fn small(patch: impl FnOnce(&mut ScenarioConfig)) -> Scenario {
    let mut cfg = ScenarioConfig {
        modes: 4,
        mesh: MeshSpec::with_nodes(24),
        control: ControlConfig {
            lo: -1.0,
            hi: 1.0,
            atoms: 5,
        },
        ..ScenarioConfig::default()
    };
    patch(&mut cfg);
    cfg.build().unwrap()
}

/// Probability vectors of length `m` with dyadic weights (multiples of 1/16).
fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..8, m).prop_map(|raw| {
        let mut w: Vec<u32> = raw;
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        // rescale to a total of 16 sixteenths, remainder on the largest entry
        let total: u32 = w.iter().sum();
        let mut units: Vec<u32> = w.iter().map(|&x| x * 16 / total).collect();
        let short = 16 - units.iter().sum::<u32>();
        let big = (0..units.len()).max_by_key(|&i| w[i]).unwrap();
        units[big] += short;
        units.iter().map(|&u| u as f64 / 16.0).collect()
    })
}

fn relaxed(pieces: usize, m: usize) -> impl Strategy<Value = RelaxedControl> {
    prop::collection::vec(simplex(m), pieces)
        .prop_map(move |rows| RelaxedControl::new(uniform_breakpoints(1.0, pieces), rows).unwrap())
}

/// Time spent on each atom over `[a, b]` by an ordinary control.
fn occupation(u: &OrdinaryControl, m: usize, a: f64, b: f64) -> Vec<f64> {
    let mut t = vec![0.0; m];
    for (w, &atom) in u.breakpoints().windows(2).zip(u.atoms()) {
        let len = (w[1].min(b) - w[0].max(a)).max(0.0);
        t[atom] += len;
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chattering_preserves_time_per_atom(v in relaxed(4, 5), n in prop::sample::select(vec![4usize, 8, 16, 32])) {
        let u = chattering_approximate(&v, n, &[0.5]).unwrap();
        for (k, w) in v.breakpoints().windows(2).enumerate() {
            let occ = occupation(&u, 5, w[0], w[1]);
            for (o, weight) in occ.iter().zip(&v.weights()[k]) {
                prop_assert!((o - weight * (w[1] - w[0])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weak_star_gap_is_a_pseudometric(a in relaxed(2, 5), b in relaxed(4, 5), c in relaxed(4, 5)) {
        let grid = ControlGrid::uniform(-1.0, 1.0, 5).unwrap();
        let f = TestFamily::default();
        let d = |x: &RelaxedControl, y: &RelaxedControl| weak_star_gap(&grid, x, y, &f).unwrap();
        prop_assert!(d(&a, &a).abs() < 1e-14);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-14);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-14);
    }

    #[test]
    fn dirac_embedding_is_a_section_of_chattering(atoms in prop::collection::vec(0usize..5, 1..6), n in 8usize..40) {
        let u = OrdinaryControl::uniform(1.0, atoms).unwrap();
        let grid = ControlGrid::uniform(-1.0, 1.0, 5).unwrap();
        let v = embed_dirac(&u, &grid).unwrap();
        prop_assert!(v.is_dirac());
        let back = chattering_approximate(&v, n.max(u.pieces()), &[]).unwrap();
        for i in 0..200 {
            let t = (i as f64 + 0.5) / 200.0;
            prop_assert_eq!(back.atom_at(t), u.atom_at(t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cost_scales_with_the_integrand(c in -3.0f64..3.0, v in relaxed(2, 5)) {
        let sc = small(|_| {});
        let scaled = FnIntegrand::scaled(sc.integrand.clone(), c);
        let base = cost_relaxed(&sc.problem, &sc.grid, sc.integrand.as_ref(), &v, &sc.mesh()).unwrap();
        let got = cost_relaxed(&sc.problem, &sc.grid, &scaled, &v, &sc.mesh()).unwrap();
        prop_assert!((got - c * base).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn dirac_and_ordinary_agree(atoms in prop::collection::vec(0usize..5, 1..5)) {
        let sc = small(|_| {});
        let u = OrdinaryControl::uniform(1.0, atoms).unwrap();
        let v = embed_dirac(&u, &sc.grid).unwrap();
        let a = solve_ordinary(&sc.problem, &sc.grid, &u, &sc.mesh()).unwrap();
        let b = solve_relaxed(&sc.problem, &sc.grid, &v, &sc.mesh()).unwrap();
        prop_assert_eq!(a.values(), b.values());
        let i = sc.integrand.as_ref();
        prop_assert_eq!(
            cost_ordinary(&sc.problem, &sc.grid, i, &u, &sc.mesh()).unwrap(),
            cost_relaxed(&sc.problem, &sc.grid, i, &v, &sc.mesh()).unwrap()
        );
    }
}

#[test]
fn closed_form_costs() {
    let cost = |kind: IntegrandConfig, atom: usize| {
        let sc = small(|c| c.integrand = kind);
        let u = OrdinaryControl::constant(1.0, atom).unwrap();
        cost_ordinary(&sc.problem, &sc.grid, sc.integrand.as_ref(), &u, &sc.mesh()).unwrap()
    };
    assert!((cost(IntegrandConfig::One, 2) - 1.0).abs() < 1e-12);
    // atoms -1, -0.5, 0, 0.5, 1
    assert!((cost(IntegrandConfig::Eta, 3) - 0.5).abs() < 1e-12);
    assert!((cost(IntegrandConfig::Eta, 0) + 1.0).abs() < 1e-12);
}

#[test]
fn tracking_cost_finds_the_nearest_atom() {
    let sc = small(|c| c.integrand = IntegrandConfig::Tracking { target: 0.4 });
    let search = SearchSpec {
        pieces: 2,
        ..SearchSpec::default()
    };
    let r = minimize_ordinary(
        &sc.problem,
        &sc.grid,
        sc.integrand.as_ref(),
        &sc.mesh(),
        &search,
    )
    .unwrap();
    assert!(r.certified);
    assert_eq!(r.argmin.atoms(), &[3, 3]);
    assert!((r.m_o - 0.01).abs() < 1e-12, "{}", r.m_o);
}

#[test]
fn nested_piece_counts_never_raise_the_ordinary_minimum() {
    let sc = small(|c| c.control.atoms = 3);
    // a shared mesh makes every 2-piece control cost the same as a 4-piece one
    let spec = sc.mesh().refined_by(&uniform_breakpoints(1.0, 4));
    let mut prev = f64::INFINITY;
    for pieces in [1, 2, 4] {
        let search = SearchSpec {
            pieces,
            ..SearchSpec::default()
        };
        let r = minimize_ordinary(&sc.problem, &sc.grid, sc.integrand.as_ref(), &spec, &search)
            .unwrap();
        assert!(r.certified);
        assert!(r.m_o <= prev, "P = {pieces}: {} > {prev}", r.m_o);
        prev = r.m_o;
    }
}

#[test]
fn control_free_dynamics_have_no_relaxation_gap() {
    let sc = small(|c| {
        c.nonlinearity = NonlinearityConfig::Saturating {
            damping: 1.0,
            coupling: 0.0,
        };
        c.control.atoms = 3;
    });
    let search = SearchSpec {
        pieces: 2,
        n_cells: 32,
        ..SearchSpec::default()
    };
    let r = relaxation_report(
        &sc.problem,
        &sc.grid,
        sc.integrand.as_ref(),
        &sc.mesh(),
        &search,
        &[],
    )
    .unwrap();
    assert!(r.gap.abs() <= 1e-8, "gap {}", r.gap);
    assert!(r.m_r <= r.m_o + 1e-8);
}

#[test]
fn zero_integrand_costs_nothing() {
    let sc = small(|c| c.integrand = IntegrandConfig::Zero);
    let v = sc.study_control().unwrap();
    let c = cost_relaxed(&sc.problem, &sc.grid, sc.integrand.as_ref(), &v, &sc.mesh()).unwrap();
    assert_eq!(c, 0.0);
}
