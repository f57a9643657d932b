//! The three exact KMC projectors.
//!
//! 1. Plane impact: first passage from height z0 onto an absorbing plane;
//!    the transit time comes from inverting erfc, the impact offset is
//!    Gaussian with variance 2 D t*.
//! 2. Hemisphere exit: first exit through the shell of a hemisphere with a
//!    reflecting base, sampled from the tabulated exit-time CDF; the exit
//!    point is isotropic on the shell.
//! 3. Exterior-sphere reinsertion: a particle at distance R x r from a
//!    sphere of radius r either escapes to infinity (probability 1 - 1/R)
//!    or re-enters through the sphere at a sampled time and polar angle
//!    drawn from a precomputed (t*, theta*) table.
//!
//! Tables are immutable after construction; samplers take the caller's RNG
//! stream, so concurrent particles never share mutable state.

use crate::analytic::sphere_arrival_pdf;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::specfun::{
    erfc_inv, hemisphere_exit_cdf, kn_ratio, sph_bessel_jy, talbot_invert, DEFAULT_TALBOT_NODES,
};
use rand::distributions::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Projector I: plane impact
// ---------------------------------------------------------------------------

/// Transit time to the plane for quantile nu in (0, 1):
/// t* = (1/4D) [z0 / erfc_inv(nu)]^2.
#[inline]
pub fn plane_impact_time(z0: f64, d: f64, nu: f64) -> f64 {
    let x = erfc_inv(nu).expect("nu in (0,1) by sampler contract");
    let ratio = z0 / x;
    ratio * ratio / (4.0 * d)
}

/// Sample the first impact on the plane below a particle at height z0 > 0:
/// returns (t*, dx, dy) with dx, dy ~ N(0, 2 D t*).
pub fn plane_impact<R: Rng + ?Sized>(z0: f64, d: f64, rng: &mut R) -> (f64, f64, f64) {
    debug_assert!(z0 > 0.0 && d > 0.0);
    let nu: f64 = rng.sample(Open01);
    let t = plane_impact_time(z0, d, nu);
    let sigma = (2.0 * d * t).sqrt();
    let dx: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
    let dy: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
    (t, dx, dy)
}

// ---------------------------------------------------------------------------
// Projector II: hemisphere exit
// ---------------------------------------------------------------------------

/// Tabulated exit-time CDF F_T(tau) for the hemisphere projector, stored on
/// a log grid of the scaled time tau = pi^2 D t / R^2 with log-log linear
/// interpolation in both directions.
///
/// Beyond `tail_threshold` the inverse uses the asymptotic
/// tau = ln(2 / (1 - xi)), whose error is O((1-xi)^3).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HemisphereCdfTable {
    /// ln(tau) grid, uniform.
    log_tau: Vec<f64>,
    /// ln(F_T) at the grid points.
    log_cdf: Vec<f64>,
    /// CDF value above which the asymptotic inverse takes over.
    pub tail_threshold: f64,
}

/// Smallest tabulated tau: F_T(0.06) ~ 2e-17 sits below the smallest
/// uniform draw, so the table covers every reachable quantile.
const HEMI_TAU_MIN: f64 = 0.06;
const HEMI_TAU_MAX: f64 = 6.0;
/// Grid size giving ~4e-7 log-log interpolation error (within the 1e-6 budget).
pub const HEMI_DEFAULT_POINTS: usize = 16384;

impl HemisphereCdfTable {
    pub fn build(n_points: usize) -> Result<Self> {
        if n_points < 64 {
            return Err(Error::config(format!(
                "hemisphere table needs >= 64 points, got {n_points}"
            )));
        }
        let l0 = HEMI_TAU_MIN.ln();
        let l1 = HEMI_TAU_MAX.ln();
        let mut log_tau = Vec::with_capacity(n_points);
        let mut log_cdf = Vec::with_capacity(n_points);
        for i in 0..n_points {
            let lt = l0 + (l1 - l0) * i as f64 / (n_points - 1) as f64;
            log_tau.push(lt);
            log_cdf.push(hemisphere_exit_cdf(lt.exp())?.ln());
        }
        let tail_threshold = log_cdf[n_points - 1].exp();
        Ok(HemisphereCdfTable {
            log_tau,
            log_cdf,
            tail_threshold,
        })
    }

    /// Interpolated F_T(tau).
    pub fn cdf(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::domain(format!("cdf: tau = {tau} must be > 0")));
        }
        let lt = tau.ln();
        let n = self.log_tau.len();
        if lt <= self.log_tau[0] {
            return hemisphere_exit_cdf(tau);
        }
        if lt >= self.log_tau[n - 1] {
            return hemisphere_exit_cdf(tau);
        }
        let step = (self.log_tau[n - 1] - self.log_tau[0]) / (n - 1) as f64;
        let i = (((lt - self.log_tau[0]) / step) as usize).min(n - 2);
        let w = (lt - self.log_tau[i]) / step;
        Ok((self.log_cdf[i] * (1.0 - w) + self.log_cdf[i + 1] * w).exp())
    }

    /// Invert F_T(tau*) = xi.
    pub fn invert(&self, xi: f64) -> f64 {
        debug_assert!(xi > 0.0 && xi < 1.0);
        if xi > self.tail_threshold {
            return (2.0 / (1.0 - xi)).ln();
        }
        let lxi = xi.ln();
        if lxi <= self.log_cdf[0] {
            return self.log_tau[0].exp();
        }
        // Binary search the monotone log-CDF.
        let mut lo = 0usize;
        let mut hi = self.log_cdf.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.log_cdf[mid] <= lxi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let span = self.log_cdf[hi] - self.log_cdf[lo];
        let w = if span > 0.0 { (lxi - self.log_cdf[lo]) / span } else { 0.5 };
        (self.log_tau[lo] * (1.0 - w) + self.log_tau[hi] * w).exp()
    }
}

/// Sample the exit of a particle released at the center of the base of a
/// hemisphere of the given radius: returns (t*, exit point relative to the
/// center, with z >= 0 along the hemisphere axis).
pub fn hemisphere_exit<R: Rng + ?Sized>(
    radius: f64,
    d: f64,
    table: &HemisphereCdfTable,
    rng: &mut R,
) -> (f64, Vec3) {
    debug_assert!(radius > 0.0 && d > 0.0);
    let xi: f64 = rng.sample(Open01);
    let tau = table.invert(xi);
    let t = radius * radius * tau / (d * std::f64::consts::PI * std::f64::consts::PI);
    // Isotropic on the shell: dS = R dtheta dz makes z uniform.
    let zeta: f64 = rng.sample(Open01);
    let eta: f64 = rng.sample::<f64, _>(Open01) * 2.0 * std::f64::consts::PI;
    let rho = (1.0 - zeta * zeta).sqrt();
    (
        t,
        Vec3::new(radius * rho * eta.cos(), radius * rho * eta.sin(), radius * zeta),
    )
}

// ---------------------------------------------------------------------------
// Appendix machinery: chi_n and the polar-angle CDF
// ---------------------------------------------------------------------------

/// chi_n(t) = L^{-1}[ k_n(alpha R) / k_n(alpha) ](t), alpha = sqrt(s/D),
/// inverted on the Talbot contour.
pub fn chi_n(n: usize, t: f64, big_r: f64, d: f64) -> Result<f64> {
    chi_n_nodes(n, t, big_r, d, DEFAULT_TALBOT_NODES)
}

pub fn chi_n_nodes(n: usize, t: f64, big_r: f64, d: f64, nodes: usize) -> Result<f64> {
    if !(t > 0.0 && big_r > 1.0 && d > 0.0) {
        return Err(Error::domain(format!(
            "chi_n: need t > 0, R > 1, D > 0 (got t={t}, R={big_r}, D={d})"
        )));
    }
    talbot_invert(
        |s| kn_ratio(n, (s / d).sqrt(), big_r).unwrap_or(num_complex::Complex64::new(f64::NAN, 0.0)),
        t,
        nodes,
    )
}

/// Independent oracle for [`chi_n`]: the hairpin-contour real integral
/// chi_n(t) = (2D/pi) Int_0^inf w e^{-w^2 D t}
///            [j_n(w) y_n(wR) - y_n(w) j_n(wR)] / [j_n(w)^2 + y_n(w)^2] dw
/// by adaptive quadrature, cut off where the Gaussian factor is < 1e-16.
pub fn chi_n_hairpin(n: usize, t: f64, big_r: f64, d: f64) -> Result<f64> {
    if !(t > 0.0 && big_r > 1.0 && d > 0.0) {
        return Err(Error::domain(format!(
            "chi_n_hairpin: need t > 0, R > 1, D > 0 (got t={t}, R={big_r}, D={d})"
        )));
    }
    let integrand = |w: f64| -> f64 {
        if w <= 0.0 {
            return 0.0; // j_n y_n ratio tends to 0 like w^{2n+2}
        }
        let (jn, yn) = sph_bessel_jy(n, w).expect("w > 0");
        let (jnr, ynr) = sph_bessel_jy(n, w * big_r).expect("wR > 0");
        let num = jn * ynr - yn * jnr;
        let den = jn * jn + yn * yn;
        w * (-w * w * d * t).exp() * num / den
    };
    let w_max = (37.0 / (d * t)).sqrt();
    // Integrate piecewise over oscillation-scale panels for robustness.
    let panel = (std::f64::consts::PI / (big_r - 1.0)).min(w_max / 8.0);
    let mut total = 0.0;
    let mut a = 0.0;
    while a < w_max {
        let b = (a + panel).min(w_max);
        total += crate::specfun::adaptive_simpson(&integrand, a, b, 1e-13)?;
        a = b;
    }
    Ok(2.0 * d / std::f64::consts::PI * total)
}

/// Coefficients of the polar-angle CDF series at a fixed arrival time:
/// P_Theta(theta) = (1 - cos theta)/2
///   + (1/2) sum_{n >= 1} [chi_n(t)/J(t)] [P_{n-1}(cos theta) - P_{n+1}(cos theta)].
///
/// The series is truncated once two consecutive coefficients drop below
/// 1e-8 in magnitude (each term is bounded by |c_n| since |P| <= 1), with a
/// hard cap that sets `converged = false` when hit; that only happens for
/// very short sojourn times where theta* is pinned near zero anyway.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarAngleCdf {
    coeffs: Vec<f64>,
    pub converged: bool,
}

/// Series truncation threshold: contribution of a dropped term to the CDF.
const POLAR_SERIES_TOL: f64 = 1e-8;
/// Hard cap on the Legendre order.
pub const POLAR_N_MAX: usize = 256;

impl PolarAngleCdf {
    pub fn build(t: f64, big_r: f64, d: f64, n_max: usize) -> Result<Self> {
        let flux = sphere_arrival_pdf(t, big_r, d);
        if !(flux.is_finite() && flux > 0.0) {
            return Err(Error::numerical(format!(
                "polar-angle CDF: arrival flux underflows at t = {t}"
            )));
        }
        let mut coeffs = Vec::new();
        let mut small_run = 0;
        let mut converged = false;
        for n in 1..=n_max {
            let c = chi_n(n, t, big_r, d)? / flux;
            if !c.is_finite() {
                return Err(Error::numerical(format!(
                    "polar-angle CDF: chi_{n}/J non-finite at t = {t}"
                )));
            }
            coeffs.push(c);
            if c.abs() < POLAR_SERIES_TOL {
                small_run += 1;
                if small_run >= 2 {
                    converged = true;
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        Ok(PolarAngleCdf { coeffs, converged })
    }

    /// Evaluate the CDF at polar angle theta in [0, pi].
    pub fn eval(&self, theta: f64) -> f64 {
        let x = theta.cos();
        let mut sum = 0.0;
        // Rolling Legendre recurrence: terms use P_{n-1} - P_{n+1}.
        let mut p_prev = 1.0; // P_0
        let mut p_curr = x; // P_1
        for (i, &c) in self.coeffs.iter().enumerate() {
            let n = (i + 1) as f64;
            let p_next = ((2.0 * n + 1.0) * x * p_curr - n * p_prev) / (n + 1.0);
            sum += c * (p_prev - p_next);
            p_prev = p_curr;
            p_curr = p_next;
        }
        (0.5 * (1.0 - x) + 0.5 * sum).clamp(0.0, 1.0)
    }

    /// Invert the CDF by bisection on [0, pi] to 1e-10.
    pub fn invert(&self, nu: f64) -> f64 {
        let mut lo = 0.0_f64;
        let mut hi = std::f64::consts::PI;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < nu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// One-shot evaluation of the polar-angle CDF (convenience wrapper; table
/// construction should reuse [`PolarAngleCdf`] across theta values).
pub fn polar_angle_cdf(theta: f64, t: f64, big_r: f64, d: f64, n_max: usize) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::domain(format!("theta = {theta} outside [0, pi]")));
    }
    Ok(PolarAngleCdf::build(t, big_r, d, n_max)?.eval(theta))
}

// ---------------------------------------------------------------------------
// Projector III: reinsertion / escape
// ---------------------------------------------------------------------------

/// Precomputed (t*, theta*) grid for the exterior-sphere propagator at a
/// fixed launch/landing ratio R, nondimensionalized to landing radius 1.
///
/// Rows follow a uniform mu-grid on (0, 1/R) (midpoints); t*(mu) is strictly
/// increasing (mu -> 1/R gives arbitrarily long sojourns). Columns follow a
/// uniform nu-grid on (0, 1); theta*(mu, .) is strictly increasing, and as
/// t* grows its quantiles approach those of the uniform law (1 - cos)/2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReinsertionTable {
    pub ratio: f64,
    /// Diffusivity the table was built with (engine tables use D = 1).
    pub diffusivity: f64,
    pub mu_grid: Vec<f64>,
    pub nu_grid: Vec<f64>,
    /// t*(mu) per row, nondimensional (landing radius 1, diffusivity `diffusivity`).
    pub times: Vec<f64>,
    /// theta*(mu, nu) per row and column.
    pub angles: Vec<Vec<f64>>,
    /// Rows whose polar series hit the order cap before converging.
    pub convergence_warnings: usize,
}

/// Entry selection: the paper picks the nearest tabulated entry; the
/// interpolated mode refines theta* linearly in nu and recomputes t* from
/// the exact quantile formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLookup {
    NearestEntry,
    Interpolated,
}

/// Outcome of the escape/reinsertion propagator.
#[derive(Debug, Clone, Copy)]
pub enum Reinsertion {
    Escaped,
    /// Elapsed physical time and the landing point relative to the sphere
    /// center (|landing| = landing_radius).
    Landed { elapsed: f64, landing: Vec3 },
}

pub fn build_reinsertion_table(
    ratio: f64,
    grid: (usize, usize),
    d: f64,
) -> Result<ReinsertionTable> {
    let (g_mu, g_nu) = grid;
    if g_mu < 16 || g_nu < 16 {
        return Err(Error::config(format!(
            "reinsertion grid {g_mu}x{g_nu} must be at least 16x16"
        )));
    }
    if !(ratio > 1.0 && d > 0.0) {
        return Err(Error::config(format!(
            "reinsertion table: need ratio > 1 and D > 0 (got {ratio}, {d})"
        )));
    }
    let mu_grid: Vec<f64> = (0..g_mu)
        .map(|i| (i as f64 + 0.5) / g_mu as f64 / ratio)
        .collect();
    let nu_grid: Vec<f64> = (0..g_nu)
        .map(|j| (j as f64 + 0.5) / g_nu as f64)
        .collect();
    let mut times = Vec::with_capacity(g_mu);
    let mut angles = Vec::with_capacity(g_mu);
    let mut warnings = 0usize;
    for &mu in &mu_grid {
        let x = erfc_inv(ratio * mu)?;
        let t = ((ratio - 1.0) / x).powi(2) / (4.0 * d);
        let cdf = PolarAngleCdf::build(t, ratio, d, POLAR_N_MAX)?;
        if !cdf.converged {
            warnings += 1;
        }
        let row: Vec<f64> = nu_grid.iter().map(|&nu| cdf.invert(nu)).collect();
        times.push(t);
        angles.push(row);
    }
    Ok(ReinsertionTable {
        ratio,
        diffusivity: d,
        mu_grid,
        nu_grid,
        times,
        angles,
        convergence_warnings: warnings,
    })
}

impl ReinsertionTable {
    /// Exact nondimensional arrival time for quantile mu in (0, 1/R).
    #[inline]
    pub fn exact_time(&self, mu: f64) -> f64 {
        let x = erfc_inv(self.ratio * mu).expect("mu in (0,1/R)");
        ((self.ratio - 1.0) / x).powi(2) / (4.0 * self.diffusivity)
    }
}

/// Propagate a particle at `position` (relative to the landing sphere's
/// center, with |position| = ratio x landing_radius): escape with
/// probability 1 - 1/ratio, otherwise sample (t*, theta*, phi*) and land on
/// the sphere of `landing_radius`.
///
/// `d` is the physical diffusivity; elapsed time is rescaled from the
/// table's nondimensionalization by landing_radius^2 (D_table / D).
pub fn reinsert_or_escape<R: Rng + ?Sized>(
    position: Vec3,
    landing_radius: f64,
    table: &ReinsertionTable,
    d: f64,
    lookup: TableLookup,
    rng: &mut R,
) -> Reinsertion {
    debug_assert!(
        (position.norm() / landing_radius / table.ratio - 1.0).abs() < 1e-6,
        "caller must guarantee |position| = ratio x landing_radius"
    );
    let mu: f64 = rng.sample(Open01);
    if mu >= 1.0 / table.ratio {
        return Reinsertion::Escaped;
    }
    let g_mu = table.mu_grid.len();
    let g_nu = table.nu_grid.len();
    let row = ((mu * table.ratio * g_mu as f64) as usize).min(g_mu - 1);
    let nu: f64 = rng.sample(Open01);
    let col = ((nu * g_nu as f64) as usize).min(g_nu - 1);
    let (t_nondim, theta) = match lookup {
        TableLookup::NearestEntry => (table.times[row], table.angles[row][col]),
        TableLookup::Interpolated => {
            // Exact time from the drawn quantile; theta interpolated in nu
            // along the nearest-mu row.
            let t = table.exact_time(mu);
            let row_angles = &table.angles[row];
            let pos = nu * g_nu as f64 - 0.5;
            let theta = if pos <= 0.0 {
                row_angles[0]
            } else if pos >= (g_nu - 1) as f64 {
                row_angles[g_nu - 1]
            } else {
                let i = pos as usize;
                let w = pos - i as f64;
                row_angles[i] * (1.0 - w) + row_angles[i + 1] * w
            };
            (t, theta)
        }
    };
    let elapsed = t_nondim * landing_radius * landing_radius * table.diffusivity / d;
    let phi: f64 = rng.sample::<f64, _>(Open01) * 2.0 * std::f64::consts::PI;
    // Rotate (theta, phi) so the pole aligns with the launch direction.
    let axis = position.normalized();
    let a = axis.any_orthonormal();
    let b = axis.cross(a);
    let (st, ct) = theta.sin_cos();
    let dir = axis * ct + (a * phi.cos() + b * phi.sin()) * st;
    Reinsertion::Landed {
        elapsed,
        landing: dir * landing_radius,
    }
}
