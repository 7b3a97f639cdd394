//! The `ξ_μ` density against high-precision reference values, plus its
//! normalization and Laplace-transform identities.

use hilfer_relax::specfun::{mittag_leffler, wright_series, xi_density, xi_expectation};

#[test]
fn density_matches_reference_table() {
    let text = include_str!("data/xi_reference.csv");
    let mut worst = (0.0f64, String::new());
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let v = xi_density(f[0], f[1]).unwrap_or_else(|e| panic!("{line}: {e}"));
        let rel = ((v - f[2]) / f[2]).abs();
        if rel > worst.0 {
            worst = (rel, line.to_string());
        }
        rows += 1;
    }
    println!(
        "checked {rows}, worst relative error {:e} at {}",
        worst.0, worst.1
    );
    assert!(rows > 40);
    assert!(worst.0 <= 1e-9, "worst {:e} at {}", worst.0, worst.1);
}

#[test]
fn density_is_normalized() {
    for &mu in &[0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let mass = xi_expectation(mu, |_| 1.0, 1e-10).unwrap().value;
        assert!((mass - 1.0).abs() <= 1e-6, "μ={mu}: mass {mass}");
    }
}

#[test]
fn laplace_identity() {
    for &mu in &[0.4, 0.6, 0.8] {
        for &z in &[0.5, 1.0, 2.0] {
            let lhs = xi_expectation(mu, |t| mu * t * (-z * t).exp(), 1e-10)
                .unwrap()
                .value;
            let rhs = mittag_leffler(mu, mu, -z).unwrap();
            assert!((lhs - rhs).abs() <= 1e-6, "μ={mu} z={z}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn wright_tail_terms_shrink() {
    // past the peak the series terms decay monotonically
    let mut prev = f64::INFINITY;
    for n in 10..30 {
        let s = wright_series(0.5, 3.0, n).unwrap();
        assert!(s.last_term <= prev);
        prev = s.last_term;
    }
}
