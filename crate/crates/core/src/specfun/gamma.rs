use crate::error::{domain, Result};

/// Γ(x) for `x > 0`.
///
/// ```
/// use hilfer_relax::specfun::gamma;
/// assert_eq!(gamma(5.0).unwrap(), 24.0);
/// assert!((gamma(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-15);
/// assert!(gamma(0.0).is_err());
/// ```
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(
            "gamma",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(libm::tgamma(x))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// 1/Γ(x) on the whole real line, exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return (-ln_gamma(x)).exp();
    }
    if x < -170.0 {
        // reflection: 1/Γ(x) = Γ(1-x) sin(πx)/π
        let s = sin_pi(x);
        let (lg, _) = libm::lgamma_r(1.0 - x);
        return s * lg.exp() / std::f64::consts::PI;
    }
    1.0 / libm::tgamma(x)
}

/// sin(πx) with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (std::f64::consts::PI * r).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_values() {
        let cases = [
            (1.0, 1.0),
            (5.0, 24.0),
            (0.5, 1.772_453_850_905_516),
            (1.5, 0.886_226_925_452_758),
            (0.1, 9.513_507_698_668_732),
            (10.0, 362_880.0),
            (20.5, 5.406_242_982_335_075e17),
        ];
        for (x, g) in cases {
            let v = gamma(x).unwrap();
            assert!(((v - g) / g).abs() < 1e-12, "Γ({x}) = {v}, want {g}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(gamma(-1.5).is_err());
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn reciprocal_gamma_poles_and_negatives() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        // Γ(-0.5) = -2√π
        let want = -1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((rgamma(-0.5) - want).abs() < 1e-15);
        assert!((rgamma(171.5).ln() + libm::lgamma(171.5)).abs() < 1e-10);
    }
}
