//! Special functions and numerical transforms underpinning the propagators
//! and the analytic reference formulas: error-function family, Legendre
//! polynomials, spherical Bessel functions, the hemisphere exit-time CDF and
//! Talbot inversion of Laplace transforms.
//!
//! Everything here is a pure function of its arguments and safe to call
//! concurrently.

mod bessel;
mod erf;
mod talbot;

pub use bessel::{kn_ratio, sph_bessel_jy};
pub use erf::{erf, erfc, erfc_inv, erfcx};
pub use talbot::{talbot_invert, TalbotContour, DEFAULT_TALBOT_NODES};

use crate::error::{Error, Result};

/// Absolute truncation threshold for the alternating/theta series below;
/// below double rounding at the CDF's O(1) scale.
const SERIES_EPS: f64 = 1e-15;

/// CDF of the scaled exit time tau = pi^2 D t / R^2 through a hemisphere of
/// radius R (reflecting base, absorbing shell).
///
/// For tau >= 1 the alternating series 1 + 2 sum (-1)^n exp(-n^2 tau) is
/// used; for tau < 1 its Poisson-summation (theta transform) counterpart
/// 2 sqrt(pi/tau) sum exp(-pi^2 (n+1/2)^2 / tau), which converges rapidly
/// for small tau. Both are truncated once the next term drops below 1e-15.
pub fn hemisphere_exit_cdf(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!(
            "hemisphere_exit_cdf: tau = {tau} must be > 0"
        )));
    }
    if tau >= 1.0 {
        let mut sum = 1.0;
        let mut sign = -1.0;
        for n in 1..200 {
            let term = 2.0 * (-((n * n) as f64) * tau).exp();
            sum += sign * term;
            if term < SERIES_EPS {
                break;
            }
            sign = -sign;
        }
        Ok(sum)
    } else {
        let pref = 2.0 * (std::f64::consts::PI / tau).sqrt();
        let mut sum = 0.0;
        for n in 0..200 {
            let a = n as f64 + 0.5;
            let term = pref * (-std::f64::consts::PI.powi(2) * a * a / tau).exp();
            sum += term;
            if term < SERIES_EPS {
                break;
            }
        }
        Ok(sum)
    }
}

/// Legendre polynomials [P_0(x), ..., P_{n_max}(x)] by the three-term
/// recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}; P_n(1) = 1 exactly.
pub fn legendre_sequence(x: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "legendre_sequence: x = {x} outside [-1, 1]"
        )));
    }
    let mut p = Vec::with_capacity(n_max + 1);
    p.push(1.0);
    if n_max == 0 {
        return Ok(p);
    }
    p.push(x);
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        p.push(next);
    }
    Ok(p)
}

/// Adaptive Simpson quadrature of `f` on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            // The Richardson increment has stalled at rounding scale:
            // accept; a large residual is genuine non-convergence.
            if delta.abs() <= 1e-10 {
                return Ok(left + right + delta / 15.0);
            }
            return Err(Error::numerical(
                "adaptive_simpson: quadrature did not converge".to_string(),
            ));
        }
        // Halve the budget per side, but never demand refinement below
        // the rounding noise of the panel sums themselves.
        let child_tol = (0.5 * tol).max(f64::EPSILON * whole.abs()).max(1e-18);
        let l = recurse(f, a, fa, m, fm, left, lm, flm, child_tol, depth - 1)?;
        let r = recurse(f, m, fm, b, fb, right, rm, frm, child_tol, depth - 1)?;
        Ok(l + r)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Evaluate both series branches regardless of the internal crossover.
    fn cdf_branch_large(tau: f64) -> f64 {
        let mut sum = 1.0;
        for n in 1..500 {
            let term = 2.0 * (-((n * n) as f64) * tau).exp();
            sum += if n % 2 == 1 { -term } else { term };
            if term < 1e-18 {
                break;
            }
        }
        sum
    }
    fn cdf_branch_theta(tau: f64) -> f64 {
        let pref = 2.0 * (std::f64::consts::PI / tau).sqrt();
        let mut sum = 0.0;
        for n in 0..500 {
            let a = n as f64 + 0.5;
            let term = pref * (-std::f64::consts::PI.powi(2) * a * a / tau).exp();
            sum += term;
            if term < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn hemisphere_cdf_limits() {
        // Large tau: dominated by the n = 1 term.
        let got = hemisphere_exit_cdf(50.0).unwrap();
        assert_relative_eq!(got, 1.0 - 2.0 * (-50.0_f64).exp(), epsilon = 1e-15);
        // Small tau: exponentially small escape probability.
        assert!(hemisphere_exit_cdf(0.05).unwrap() < 1e-18);
        assert!(hemisphere_exit_cdf(0.0).is_err());
        assert!(hemisphere_exit_cdf(-1.0).is_err());
    }

    #[test]
    fn theta_identity_at_crossover() {
        // Both series forms agree where they are both usable.
        let mut tau = 0.25;
        while tau <= 4.0 {
            let a = cdf_branch_large(tau);
            let b = cdf_branch_theta(tau);
            assert!((a - b).abs() < 1e-12, "tau={tau}: {a} vs {b}");
            tau += 0.125;
        }
        // And the public function is continuous across tau = 1.
        let lo = hemisphere_exit_cdf(1.0 - 1e-12).unwrap();
        let hi = hemisphere_exit_cdf(1.0 + 1e-12).unwrap();
        assert!((lo - hi).abs() < 1e-11);
    }

    #[test]
    fn hemisphere_cdf_monotone_on_grid() {
        let mut prev = 0.0;
        for i in 1..400 {
            let tau = 0.02 * i as f64;
            let v = hemisphere_exit_cdf(tau).unwrap();
            assert!(v >= prev, "CDF decreased at tau = {tau}");
            prev = v;
        }
        assert!(prev <= 1.0 + 1e-15);
    }

    #[test]
    fn legendre_pinned_values() {
        assert_eq!(legendre_sequence(1.0, 5).unwrap(), vec![1.0; 6]);
        let p = legendre_sequence(0.0, 2).unwrap();
        assert_eq!(p, vec![1.0, 0.0, -0.5]);
        // P_3(x) = (5x^3 - 3x)/2 at x = 0.5.
        let p = legendre_sequence(0.5, 3).unwrap();
        assert_relative_eq!(p[3], -0.4375, epsilon = 1e-15);
        assert!(legendre_sequence(1.5, 3).is_err());
    }

    proptest! {
        #[test]
        fn legendre_bounded_and_normalized(x in -1.0..1.0f64) {
            let p = legendre_sequence(x, 40).unwrap();
            for v in &p {
                prop_assert!(v.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn erfc_round_trip_property(y in 1e-6..(2.0 - 1e-6)) {
            let x = erfc_inv(y).unwrap();
            prop_assert!((erfc(x) - y).abs() <= 1e-13 * y.max(1e-3));
        }
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), 0.0, 8.0, 1e-12).unwrap();
        assert_relative_eq!(v, 0.5 * std::f64::consts::PI.sqrt(), max_relative = 1e-10);
    }
}
