//! The Wright-type density `ξ_μ` and the one-sided stable series `ϖ_μ`.
//!
//! `ξ_μ(θ) = (1/μ) θ^{-1-1/μ} ϖ_μ(θ^{-1/μ})` is a probability density on
//! `(0, ∞)` with `∫ μθ ξ_μ(θ) e^{-zθ} dθ = E_{μ,μ}(-z)`. Substituting the
//! series for `ϖ_μ` gives the entire power series
//! `ξ_μ(θ) = (1/(πμ)) Σ_{n≥1} (-1)^{n-1} θ^{n-1} Γ(nμ+1)/n! · sin(nπμ)`,
//! which cancels badly once `θ` is large. There the Kanter representation
//! of the stable law is used instead:
//! `ξ_μ(θ) = θ^{μ/(1-μ)} / ((1-μ)π) ∫_0^π A(φ) exp(-θ^{1/(1-μ)} A(φ)) dφ`,
//! `A(φ) = [sin(μφ)^μ sin((1-μ)φ)^{1-μ} / sin φ]^{1/(1-μ)}`.

use super::gamma::{ln_gamma, sin_pi};
use super::mittag_leffler::Compensated;
use crate::error::{domain, Error, Result};
use crate::quad::{exp_sinh, tanh_sinh, Estimate};

/// Stop the `ϖ_μ` series once the last term drops below this fraction of the sum.
pub const WRIGHT_RELATIVE_STOP: f64 = 1e-14;
/// Hard cap on `ϖ_μ` terms.
pub const WRIGHT_MAX_TERMS: usize = 400;

/// Partial sum of `ϖ_μ(θ)` together with the magnitude of its last term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightSum {
    pub value: f64,
    pub last_term: f64,
    pub terms: usize,
}

/// `ϖ_μ(θ) ≈ (1/π) Σ_{n=1}^{N} (-1)^{n-1} θ^{-nμ-1} Γ(nμ+1)/n! sin(nπμ)`.
///
/// ```
/// use hilfer_relax::specfun::wright_series;
/// let s = wright_series(0.5, 2.0, 1).unwrap();
/// let want = 2f64.powf(-1.5) * 0.886_226_925_452_758 / std::f64::consts::PI;
/// assert!((s.value - want).abs() < 1e-15);
/// ```
pub fn wright_series(mu: f64, theta: f64, n_terms: usize) -> Result<WrightSum> {
    check_mu("wright_series", mu)?;
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(domain(
            "wright_series",
            format!("theta must be positive, got {theta}"),
        ));
    }
    if n_terms == 0 {
        return Err(domain("wright_series", "n_terms must be at least 1"));
    }
    let lt = theta.ln();
    let mut acc = Compensated::default();
    let mut last = 0.0;
    for n in 1..=n_terms {
        let nf = n as f64;
        let log_mag = -(nf * mu + 1.0) * lt + ln_gamma(nf * mu + 1.0) - ln_gamma(nf + 1.0);
        let mag = log_mag.exp();
        if !mag.is_finite() {
            return Err(Error::Overflow {
                op: "wright_series",
            });
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        acc.add(sign * mag * sin_pi(nf * mu));
        last = mag;
    }
    Ok(WrightSum {
        value: acc.value() / std::f64::consts::PI,
        last_term: last / std::f64::consts::PI,
        terms: n_terms,
    })
}

/// `ϖ_μ(θ)` truncated at the first term below `1e-14` of the partial sum or
/// at 400 terms; the returned proxy is the last term magnitude.
pub fn wright_truncated(mu: f64, theta: f64) -> Result<WrightSum> {
    check_mu("wright_series", mu)?;
    let lt = theta.ln();
    let mut acc = Compensated::default();
    let mut last = f64::INFINITY;
    let mut terms = 0;
    for n in 1..=WRIGHT_MAX_TERMS {
        let nf = n as f64;
        let mag = (-(nf * mu + 1.0) * lt + ln_gamma(nf * mu + 1.0) - ln_gamma(nf + 1.0)).exp();
        if !mag.is_finite() {
            return Err(Error::Overflow {
                op: "wright_series",
            });
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        acc.add(sign * mag * sin_pi(nf * mu));
        last = mag;
        terms = n;
        if n > 1 && mag < WRIGHT_RELATIVE_STOP * acc.value().abs() {
            break;
        }
    }
    Ok(WrightSum {
        value: acc.value() / std::f64::consts::PI,
        last_term: last / std::f64::consts::PI,
        terms,
    })
}

/// The density `ξ_μ(θ)` for `θ > 0`.
///
/// ```
/// use hilfer_relax::specfun::xi_density;
/// // ξ_{1/2}(θ) = e^{-θ²/4}/√π
/// let v = xi_density(0.5, 1.0).unwrap();
/// assert!((v - (-0.25f64).exp() / std::f64::consts::PI.sqrt()).abs() < 1e-13);
/// ```
pub fn xi_density(mu: f64, theta: f64) -> Result<f64> {
    check_mu("xi_density", mu)?;
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(domain(
            "xi_density",
            format!("theta must be positive, got {theta}"),
        ));
    }
    // Beyond this the density is below e^{-700}.
    let a0 = mu.powf(mu / (1.0 - mu)) * (1.0 - mu);
    if theta.powf(1.0 / (1.0 - mu)) * a0 > 700.0 {
        return Ok(0.0);
    }
    if let Some(v) = xi_power_series(mu, theta) {
        return Ok(v.max(0.0));
    }
    xi_kanter(mu, theta)
}

/// The entire series in `θ`; `None` when cancellation exceeds `1e3`.
fn xi_power_series(mu: f64, theta: f64) -> Option<f64> {
    let lt = theta.ln();
    let mut acc = Compensated::default();
    for n in 1..2000 {
        let nf = n as f64;
        let mag = ((nf - 1.0) * lt + ln_gamma(nf * mu + 1.0) - ln_gamma(nf + 1.0)).exp();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        acc.add(sign * mag * sin_pi(nf * mu));
        if n > 2 && mag < 1e-17 * acc.value().abs() {
            let v = acc.value();
            return (acc.abs_sum() <= 1e3 * v.abs()).then(|| v / (std::f64::consts::PI * mu));
        }
    }
    None
}

fn xi_kanter(mu: f64, theta: f64) -> Result<f64> {
    let p = 1.0 / (1.0 - mu);
    let c = theta.powf(p);
    // `sin φ` comes from whichever endpoint distance is exact.
    let a = |phi: f64, nearest: f64| -> f64 {
        let sm = (mu * phi).sin();
        let s1m = ((1.0 - mu) * phi).sin();
        let s = nearest.sin();
        if s <= 0.0 {
            return f64::INFINITY;
        }
        (sm.powf(mu) * s1m.powf(1.0 - mu) / s).powf(p)
    };
    let a0 = mu.powf(mu * p) * (1.0 - mu);
    // `A` rises from `a0` to `∞`; the integrand peaks where `c A = 1` and is
    // below `e^{-45}` of its peak once `c (A - A_peak) > 45`.
    let pi = std::f64::consts::PI;
    let root = |target: f64| {
        let (mut lo, mut hi) = (0.0, pi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if c * a(mid, mid.min(pi - mid)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let peak = (c * a0).max(1.0);
    let split = if c * a0 >= 1.0 { 0.0 } else { root(1.0) };
    let end = root(peak + 45.0).max(split);
    let piece = |lo: f64, hi: f64| {
        tanh_sinh(
            |phi, dl, dr| {
                if phi - dl == 0.0 && dl == 0.0 {
                    return a0;
                }
                // distance to whichever end of [0, π] is nearer, kept exact
                let nearest = if phi <= 0.5 * std::f64::consts::PI {
                    if lo == 0.0 {
                        dl
                    } else {
                        phi
                    }
                } else if hi == std::f64::consts::PI {
                    dr
                } else {
                    std::f64::consts::PI - phi
                };
                let av = a(phi, nearest);
                if !av.is_finite() {
                    return 0.0;
                }
                av * (-c * (av - a0)).exp()
            },
            lo,
            hi,
            1e-13,
        )
    };
    let est = if split > 0.0 && split < end {
        let (l, r) = (piece(0.0, split), piece(split, end));
        Estimate {
            value: l.value + r.value,
            error: l.error + r.error,
            evaluations: l.evaluations + r.evaluations,
        }
    } else {
        piece(0.0, end)
    };
    // the factor e^{-c a0} was pulled out of the integrand to avoid underflow
    let v = theta.powf(mu * p) / ((1.0 - mu) * std::f64::consts::PI) * est.value * (-c * a0).exp();
    if est.error > 1e-10 * est.value.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Accuracy {
            op: "xi_density",
            achieved: est.error / est.value.abs(),
        });
    }
    Ok(v)
}

/// `∫_0^∞ ξ_μ(θ) f(θ) dθ` by the double-exponential rule on the half line.
pub fn xi_expectation<F>(mu: f64, mut f: F, tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    check_mu("xi_expectation", mu)?;
    let mut failure = None;
    let est = exp_sinh(
        |theta, _| {
            if theta == 0.0 {
                return 0.0;
            }
            match xi_density(mu, theta) {
                Ok(0.0) => 0.0,
                Ok(v) => v * f(theta),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if est.error > tol * est.value.abs().max(1.0) {
        return Err(Error::Accuracy {
            op: "xi_expectation",
            achieved: est.error,
        });
    }
    Ok(est)
}

fn check_mu(op: &'static str, mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 1.0 {
        Ok(())
    } else {
        Err(domain(op, format!("order mu must lie in (0, 1), got {mu}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_is_gaussian() {
        for &t in &[0.01, 0.3, 1.0, 2.5, 6.0, 12.0] {
            let v = xi_density(0.5, t).unwrap();
            let want = (-t * t / 4.0).exp() / std::f64::consts::PI.sqrt();
            assert!((v - want).abs() <= 1e-12 * want.max(1e-300), "θ={t}");
        }
    }

    #[test]
    fn kanter_and_series_agree_where_both_apply() {
        for &mu in &[0.3, 0.5, 0.7] {
            for &t in &[0.5, 1.0, 2.0] {
                let s = xi_power_series(mu, t).unwrap() / 1.0;
                let k = xi_kanter(mu, t).unwrap();
                assert!((s - k).abs() < 1e-11 * s, "μ={mu} θ={t}: {s} vs {k}");
            }
        }
    }

    #[test]
    fn wright_series_relation() {
        // ξ rebuilt from ϖ at small θ (large argument of ϖ) matches.
        let mu = 0.4;
        let theta: f64 = 0.5;
        let w = wright_truncated(mu, theta.powf(-1.0 / mu)).unwrap();
        let rebuilt = theta.powf(-1.0 - 1.0 / mu) * w.value / mu;
        let direct = xi_density(mu, theta).unwrap();
        assert!((rebuilt - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn domain_errors() {
        assert!(xi_density(1.0, 1.0).is_err());
        assert!(xi_density(0.5, 0.0).is_err());
        assert!(wright_series(0.5, 1.0, 0).is_err());
    }
}
