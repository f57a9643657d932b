//! Closed-form and asymptotic reference results: small-pore expansions of
//! planar arrival statistics, splitting probabilities on the plane and the
//! sphere, the two-pore capacitance series, boundary homogenization of the
//! patchy sphere, and the equivalent-sphere description of the cube.
//!
//! All functions are pure; they are the validation layer the simulation
//! results are held against.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::specfun::{erfc, erfcx};

/// Reference capacitance of the unit cube (integral-equation value).
pub const CUBE_CAPACITANCE: f64 = 0.66067815409957;

/// A pore as the analytic layer sees it: a point absorber on the plane z = 0
/// carrying a capacitance. For a circular pore of radius a the capacitance
/// is 2a/pi; general shapes enter through an externally supplied value.
/// Epsilon-scaling is folded into the capacitance (the expansions only ever
/// use the product).
#[derive(Debug, Clone)]
pub struct PoreSpec {
    /// Pore center on the plane z = 0.
    pub center: [f64; 2],
    /// Capacitance (eps * c_k in the expansion's notation).
    pub capacitance: f64,
}

impl PoreSpec {
    pub fn circular(center: [f64; 2], radius: f64) -> PoreSpec {
        PoreSpec {
            center,
            capacitance: 2.0 * radius / std::f64::consts::PI,
        }
    }
}

fn validate_pores(pores: &[PoreSpec]) -> Result<()> {
    if pores.is_empty() {
        return Err(Error::domain("no pores supplied".to_string()));
    }
    for (i, p) in pores.iter().enumerate() {
        if !(p.capacitance > 0.0) {
            return Err(Error::domain(format!("pore {i}: capacitance must be > 0")));
        }
    }
    for i in 0..pores.len() {
        for j in (i + 1)..pores.len() {
            if pores[i].center == pores[j].center {
                return Err(Error::domain(format!("pores {i} and {j} share a center")));
            }
        }
    }
    Ok(())
}

/// Distance from the release point to pore k (R_k) and between pores (d_jk).
fn source_distance(x0: Vec3, p: &PoreSpec) -> f64 {
    let dx = x0.x - p.center[0];
    let dy = x0.y - p.center[1];
    (dx * dx + dy * dy + x0.z * x0.z).sqrt()
}

fn pore_distance(a: &PoreSpec, b: &PoreSpec) -> f64 {
    let dx = a.center[0] - b.center[0];
    let dy = a.center[1] - b.center[1];
    (dx * dx + dy * dy).sqrt()
}

/// Two-term small-pore flux densities J_k(t) into each planar pore, plus the
/// total, for a particle released at `x0` with diffusivity `d`.
///
/// Per pore: the self-interaction correction
/// c_k (1 - c_k/R_k) (Dt)^{-3/2} + c_k^2 R_k/2 (Dt)^{-5/2} under the Gaussian
/// e^{-R_k^2/4Dt}, minus the cross terms with the (R_j + d_jk) exponent.
pub fn planar_flux(t: f64, pores: &[PoreSpec], x0: Vec3, d: f64) -> Result<(Vec<f64>, f64)> {
    validate_pores(pores)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("planar_flux: t = {t} must be > 0")));
    }
    if !(d > 0.0) {
        return Err(Error::domain("diffusivity must be > 0".to_string()));
    }
    let pref = d / (2.0 * std::f64::consts::PI.sqrt());
    let dt32 = (d * t).powf(-1.5);
    let dt52 = (d * t).powf(-2.5);
    let mut per_pore = Vec::with_capacity(pores.len());
    let mut total = 0.0;
    for (k, pk) in pores.iter().enumerate() {
        let ck = pk.capacitance;
        let rk = source_distance(x0, pk);
        let gauss = (-rk * rk / (4.0 * d * t)).exp();
        let mut jk = pref * ck * gauss * ((1.0 - ck / rk) * dt32 + 0.5 * ck * rk * dt52);
        for (j, pj) in pores.iter().enumerate() {
            if j == k {
                continue;
            }
            let cj = pj.capacitance;
            let rj = source_distance(x0, pj);
            let djk = pore_distance(pj, pk);
            let cross = (-(rj + djk) * (rj + djk) / (4.0 * d * t)).exp();
            jk -= pref * ck * cj * cross * (1.0 / rj + 1.0 / djk) * dt32;
        }
        per_pore.push(jk);
        total += jk;
    }
    Ok((per_pore, total))
}

/// Cumulative counterparts of [`planar_flux`]: per-pore capture fractions
/// q_k(t) and the total F(t).
pub fn planar_cdf(t: f64, pores: &[PoreSpec], x0: Vec3, d: f64) -> Result<(Vec<f64>, f64)> {
    validate_pores(pores)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("planar_cdf: t = {t} must be > 0")));
    }
    let sqrt_dt = (d * t).sqrt();
    let mut per_pore = Vec::with_capacity(pores.len());
    let mut total = 0.0;
    for (k, pk) in pores.iter().enumerate() {
        let ck = pk.capacitance;
        let rk = source_distance(x0, pk);
        let mut qk = ck / rk * erfc(rk / (2.0 * sqrt_dt))
            + ck * ck / rk * (-rk * rk / (4.0 * d * t)).exp()
                / (std::f64::consts::PI * d * t).sqrt();
        for (j, pj) in pores.iter().enumerate() {
            if j == k {
                continue;
            }
            let cj = pj.capacitance;
            let rj = source_distance(x0, pj);
            let djk = pore_distance(pj, pk);
            qk -= ck * cj / (djk * rj) * erfc((rj + djk) / (2.0 * sqrt_dt));
        }
        per_pore.push(qk);
        total += qk;
    }
    Ok((per_pore, total))
}

/// Splitting probabilities for planar pores:
/// Q_k = c_k/|x0 - x_k| - sum_{j != k} c_j c_k / (|x_j - x_k| |x0 - x_j|).
pub fn splitting_planar(pores: &[PoreSpec], x0: Vec3) -> Result<Vec<f64>> {
    validate_pores(pores)?;
    let mut out = Vec::with_capacity(pores.len());
    for (k, pk) in pores.iter().enumerate() {
        let ck = pk.capacitance;
        let rk = source_distance(x0, pk);
        let mut qk = ck / rk;
        for (j, pj) in pores.iter().enumerate() {
            if j == k {
                continue;
            }
            qk -= pj.capacitance * ck / (pore_distance(pj, pk) * source_distance(x0, pj));
        }
        out.push(qk);
    }
    Ok(out)
}

/// Surface Green's function of the Laplacian exterior to the unit sphere,
/// for a singularity at |xi| = 1:
/// G(x; xi) = (1/2pi) [ 1/|x-xi| - (1/2) log( (1 - x.xi + |x-xi|) / (|x| - x.xi) ) ].
pub fn sphere_surface_green(x: Vec3, xi: Vec3) -> Result<f64> {
    if (xi.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("green: |xi| must be 1".to_string()));
    }
    let r = (x - xi).norm();
    if r == 0.0 {
        return Err(Error::domain("green: x on the singularity".to_string()));
    }
    let dot = x.dot(xi);
    let denom = x.norm() - dot;
    // On the ray through xi the log argument is 0/0 with a finite limit:
    // for x = c xi (c > 1) the ratio tends to c/(c-1).
    if denom <= 1e-12 * x.norm() {
        let c = x.norm();
        return Ok((1.0 / (c - 1.0) - 0.5 * (c / (c - 1.0)).ln()) / (2.0 * std::f64::consts::PI));
    }
    Ok((1.0 / r - 0.5 * ((1.0 - dot + r) / denom).ln()) / (2.0 * std::f64::consts::PI))
}

/// Two-term splitting probabilities for N circular pores of common radius
/// `a` on the unit sphere, evaluated at the exterior point `x`:
/// Q_k = 4 a G(x,x_k) + (4a^2/pi) [ (3/2 - log 2a) G(x,x_k)
///        - 4 pi sum_{j != k} G(x_j,x_k) G(x,x_j) ].
pub fn splitting_sphere(pore_centers: &[Vec3], a: f64, x: Vec3) -> Result<Vec<f64>> {
    if pore_centers.is_empty() {
        return Err(Error::domain("no pores supplied".to_string()));
    }
    if !(a > 0.0) {
        return Err(Error::domain("pore radius must be > 0".to_string()));
    }
    if x.norm() <= 1.0 {
        return Err(Error::domain(format!(
            "splitting_sphere: |x| = {} must be > 1",
            x.norm()
        )));
    }
    for (k, c) in pore_centers.iter().enumerate() {
        if (c.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "pore center {k} not on the unit sphere"
            )));
        }
    }
    let log_term = 1.5 - (2.0 * a).ln();
    let mut out = Vec::with_capacity(pore_centers.len());
    for (k, &ck) in pore_centers.iter().enumerate() {
        let g_x_k = sphere_surface_green(x, ck)?;
        let mut cross = 0.0;
        for (j, &cj) in pore_centers.iter().enumerate() {
            if j == k {
                continue;
            }
            cross += sphere_surface_green(cj, ck)? * sphere_surface_green(x, cj)?;
        }
        let q = 4.0 * a * g_x_k
            + 4.0 * a * a / std::f64::consts::PI
                * (log_term * g_x_k - 4.0 * std::f64::consts::PI * cross);
        out.push(q);
    }
    Ok(out)
}

/// Strieder's series for the capacitance of two unit circular pores at
/// center separation d > 2 (six terms in 1/d).
pub fn strieder_capacitance(d: f64) -> Result<f64> {
    if !(d > 2.0) {
        return Err(Error::domain(format!(
            "strieder_capacitance: separation {d} must exceed 2"
        )));
    }
    let pi = std::f64::consts::PI;
    let pi2 = pi * pi;
    let s = 1.0 - 2.0 / (pi * d) + 4.0 / (pi2 * d * d)
        - 2.0 * (12.0 + pi2) / (3.0 * pi2 * d.powi(3))
        + 16.0 * (3.0 + pi2) / (3.0 * pi2 * pi2 * d.powi(4))
        - 4.0 * (120.0 + 70.0 * pi2 + 3.0 * pi2 * pi2) / (15.0 * pi2 * pi2 * pi * d.powi(5));
    Ok(4.0 / pi * s)
}

/// Homogenized Robin rate for N pores of radius `a` covering an area
/// fraction sigma of the unit sphere:
/// kappa = (4 D sigma / pi a) / [1 - (4/pi) sqrt(sigma) + (a/pi) log(4 e^{-1/2} sqrt(sigma))].
pub fn robin_kappa(sigma: f64, a: f64, d: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain(format!("sigma = {sigma} outside (0,1)")));
    }
    if !(a > 0.0 && d > 0.0) {
        return Err(Error::domain("a and D must be > 0".to_string()));
    }
    let pi = std::f64::consts::PI;
    let bracket =
        1.0 - 4.0 / pi * sigma.sqrt() + a / pi * (4.0 * (-0.5_f64).exp() * sigma.sqrt()).ln();
    Ok(4.0 * d * sigma / (pi * a) / bracket)
}

/// Flux density and CDF of arrivals to the unit sphere carrying the
/// homogenized Robin condition with rate `kappa`, release distance R > 1.
///
/// beta = (R-1)/(2 sqrt(Dt)) + (kappa/D + 1) sqrt(Dt); the erfc(beta) e^{beta^2}
/// factor is evaluated through the scaled complementary error function, which
/// keeps everything finite as beta grows like sqrt(t).
pub fn homog_sphere(t: f64, big_r: f64, kappa: f64, d: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("homog_sphere: t = {t} must be > 0")));
    }
    if !(big_r > 1.0) {
        return Err(Error::domain(format!(
            "homog_sphere: R = {big_r} must be > 1"
        )));
    }
    if !(kappa > 0.0 && d > 0.0) {
        return Err(Error::domain("kappa and D must be > 0".to_string()));
    }
    let sqrt_dt = (d * t).sqrt();
    let kp1 = kappa / d + 1.0;
    let beta = (big_r - 1.0) / (2.0 * sqrt_dt) + kp1 * sqrt_dt;
    let gauss = (-(big_r - 1.0) * (big_r - 1.0) / (4.0 * d * t)).exp();
    let scaled = erfcx(beta);
    let flux =
        kappa / big_r * gauss * (1.0 / (std::f64::consts::PI * d * t).sqrt() - scaled * kp1);
    let cdf = 1.0 / ((1.0 + d / kappa) * big_r)
        * (erfc((big_r - 1.0) / (2.0 * sqrt_dt)) - scaled * gauss);
    Ok((flux, cdf))
}

/// First-arrival law onto a fully absorbing unit sphere from distance R > 1:
/// pdf = (R-1)/(2R sqrt(pi D)) t^{-3/2} e^{-(R-1)^2/4Dt},
/// cdf = (1/R) erfc((R-1)/(2 sqrt(Dt))).
pub fn sphere_arrival(t: f64, big_r: f64, d: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "sphere_arrival: t = {t} must be > 0"
        )));
    }
    if !(big_r > 1.0) {
        return Err(Error::domain(format!(
            "sphere_arrival: R = {big_r} must be > 1"
        )));
    }
    if !(d > 0.0) {
        return Err(Error::domain("diffusivity must be > 0".to_string()));
    }
    Ok((
        sphere_arrival_pdf(t, big_r, d),
        erfc((big_r - 1.0) / (2.0 * (d * t).sqrt())) / big_r,
    ))
}

/// The pdf of [`sphere_arrival`] alone, without domain checks (hot path for
/// the polar-angle series normalization).
#[inline]
pub fn sphere_arrival_pdf(t: f64, big_r: f64, d: f64) -> f64 {
    (big_r - 1.0) / (2.0 * big_r * (std::f64::consts::PI * d).sqrt())
        * t.powf(-1.5)
        * (-(big_r - 1.0) * (big_r - 1.0) / (4.0 * d * t)).exp()
}

/// Capture-time CDF for the unit cube released from distance `x0_norm`,
/// modeled by the sphere of equivalent capacitance:
/// F(t) = (C_cube / R0) erfc((R0 - C_cube) / (2 sqrt(Dt))).
pub fn cube_equiv_cdf(t: f64, x0_norm: f64, d: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "cube_equiv_cdf: t = {t} must be > 0"
        )));
    }
    let r = CUBE_CAPACITANCE;
    if !(x0_norm > r) {
        return Err(Error::domain(format!(
            "cube_equiv_cdf: release distance {x0_norm} must exceed the equivalent radius {r}"
        )));
    }
    Ok(r / x0_norm * erfc((x0_norm - r) / (2.0 * (d * t).sqrt())))
}

/// One bin of the normalized differential flux Xi(t).
#[derive(Debug, Clone, Copy)]
pub struct XiBin {
    pub t_left: f64,
    pub t_right: f64,
    /// (J_top - J_bottom) / (J_top + J_bottom); None when the bin is empty.
    pub xi: Option<f64>,
    pub count_top: u64,
    pub count_bottom: u64,
}

/// Normalized differential flux between two capture-time samples, binned on
/// a shared logarithmic grid. Bins with zero combined count are flagged
/// empty rather than given a value.
pub fn differential_flux(
    top_times: &[f64],
    bottom_times: &[f64],
    t_min: f64,
    t_max: f64,
    bins: usize,
) -> Result<Vec<XiBin>> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::domain(format!(
            "differential_flux: need 0 < t_min < t_max (got {t_min}, {t_max})"
        )));
    }
    if bins == 0 {
        return Err(Error::domain(
            "differential_flux: need at least one bin".to_string(),
        ));
    }
    let log_min = t_min.log10();
    let width = (t_max.log10() - log_min) / bins as f64;
    let mut top = vec![0u64; bins];
    let mut bottom = vec![0u64; bins];
    let index = |t: f64| -> Option<usize> {
        if t < t_min || t >= t_max {
            return None;
        }
        Some((((t.log10() - log_min) / width) as usize).min(bins - 1))
    };
    for &t in top_times {
        if let Some(i) = index(t) {
            top[i] += 1;
        }
    }
    for &t in bottom_times {
        if let Some(i) = index(t) {
            bottom[i] += 1;
        }
    }
    Ok((0..bins)
        .map(|i| {
            let total = top[i] + bottom[i];
            XiBin {
                t_left: 10f64.powf(log_min + i as f64 * width),
                t_right: 10f64.powf(log_min + (i + 1) as f64 * width),
                xi: if total == 0 {
                    None
                } else {
                    Some((top[i] as f64 - bottom[i] as f64) / total as f64)
                },
                count_top: top[i],
                count_bottom: bottom[i],
            }
        })
        .collect())
}

/// The six-pore benchmark configuration: five small pores on the unit
/// circle plus one large distant pore.
pub fn six_pore_configuration() -> Vec<PoreSpec> {
    let mut pores = Vec::with_capacity(6);
    for k in 0..5 {
        let theta = std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::FRAC_PI_4;
        pores.push(PoreSpec::circular([theta.cos(), theta.sin()], 0.01));
    }
    pores.push(PoreSpec::circular([15.0, 0.0], 1.0));
    pores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::adaptive_simpson;
    use approx::assert_relative_eq;

    #[test]
    fn single_pore_flux_reduces_to_levy_form() {
        // N = 1 and dropping the eps^2 self terms leaves the Levy-type density.
        let pore = [PoreSpec::circular([0.0, 0.0], 1.0)];
        let x0 = Vec3::new(0.0, 0.0, 5.0);
        let (d, t) = (1.0, 3.0);
        let (per, total) = planar_flux(t, &pore, x0, d).unwrap();
        assert_relative_eq!(per[0], total, epsilon = 1e-300);
        let c = pore[0].capacitance;
        let r = 5.0;
        let leading = c / (4.0 * std::f64::consts::PI * d * t.powi(3)).sqrt()
            * (-r * r / (4.0 * d * t)).exp()
            * (1.0 - (c / r - c * r / (2.0 * d * t)));
        assert_relative_eq!(total, leading, max_relative = 1e-12);
    }

    #[test]
    fn flux_vanishes_at_short_time() {
        let pore = [PoreSpec::circular([0.0, 0.0], 1.0)];
        let (_, total) = planar_flux(1e-4, &pore, Vec3::new(0.0, 0.0, 5.0), 1.0).unwrap();
        assert!(total.abs() < 1e-300);
    }

    #[test]
    fn cdf_derivative_matches_flux() {
        let pores = six_pore_configuration();
        let x0 = Vec3::new(0.3, -0.2, 1.5);
        let d = 1.0;
        for &t in &[0.5, 2.0, 20.0, 300.0] {
            let h = t * 1e-5;
            let (_, f_plus) = planar_cdf(t + h, &pores, x0, d).unwrap();
            let (_, f_minus) = planar_cdf(t - h, &pores, x0, d).unwrap();
            let (_, flux) = planar_flux(t, &pores, x0, d).unwrap();
            let fd = (f_plus - f_minus) / (2.0 * h);
            assert_relative_eq!(fd, flux, max_relative = 1e-6);
        }
    }

    #[test]
    fn cdf_limit_equals_splitting_sum() {
        let pores = six_pore_configuration();
        let x0 = Vec3::new(0.0, 0.0, 2.0);
        let (_, f_inf) = planar_cdf(1e14, &pores, x0, 1.0).unwrap();
        let q: f64 = splitting_planar(&pores, x0).unwrap().iter().sum();
        assert_relative_eq!(f_inf, q, max_relative = 1e-5);
    }

    #[test]
    fn six_pore_splitting_ratio() {
        // Large pore versus the five small ones, source at the origin.
        // Independent arithmetic: leading order (c6/15)/(5 c_s) = 4/3 exactly,
        // with the pairwise corrections
        //   Q6 = c6/15 - c_s c6 S6,     S6 = sum_k 1/|x_k - x6|,
        //   Qs = 5 c_s - c_s c6 S6/15 - c_s^2 S_ss,
        // where S_ss sums 1/d_jk over ordered small-pore pairs.
        let pores = six_pore_configuration();
        let c_s = pores[0].capacitance;
        let c6 = pores[5].capacitance;
        let mut s6 = 0.0;
        for k in 0..5 {
            s6 += 1.0 / pore_distance(&pores[k], &pores[5]);
        }
        let mut s_ss = 0.0;
        for k in 0..5 {
            for j in 0..5 {
                if j != k {
                    s_ss += 1.0 / pore_distance(&pores[j], &pores[k]);
                }
            }
        }
        let want_large = c6 / 15.0 - c_s * c6 * s6;
        let want_small = 5.0 * c_s - c_s * c6 * s6 / 15.0 - c_s * c_s * s_ss;

        let q = splitting_planar(&pores, Vec3::ZERO).unwrap();
        let small: f64 = q[..5].iter().sum();
        let large = q[5];
        assert_relative_eq!(large, want_large, max_relative = 1e-12);
        assert_relative_eq!(small, want_small, max_relative = 1e-12);
        // The ratio the formula actually produces for the stated geometry.
        assert_relative_eq!(large / small, 1.32603, max_relative = 1e-4);
    }

    #[test]
    fn single_pore_splitting_is_c_over_r() {
        let pore = [PoreSpec::circular([0.0, 0.0], 1.0)];
        let q = splitting_planar(&pore, Vec3::new(0.0, 0.0, 5.0)).unwrap();
        assert_relative_eq!(q[0], 2.0 / std::f64::consts::PI / 5.0, max_relative = 1e-14);
    }

    #[test]
    fn green_function_pinned_value() {
        // x = (0,0,2), xi = (0,0,-1): G = (1/2pi)[1/3 - (1/2) log(6/4)].
        let g =
            sphere_surface_green(Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.0, 0.0, -1.0)).unwrap();
        let want = (1.0 / 3.0 - 0.5 * (1.5_f64).ln()) / (2.0 * std::f64::consts::PI);
        assert_relative_eq!(g, want, max_relative = 1e-14);
    }

    #[test]
    fn sphere_splitting_monotone_in_alignment() {
        // A single pore at the north pole: release above it beats release
        // on the far side.
        let centers = [Vec3::new(0.0, 0.0, 1.0)];
        let above = splitting_sphere(&centers, 0.1, Vec3::new(0.0, 0.0, 2.0)).unwrap()[0];
        let below = splitting_sphere(&centers, 0.1, Vec3::new(0.0, 0.0, -2.0)).unwrap()[0];
        assert!(above > below);
        assert!(splitting_sphere(&centers, 0.1, Vec3::new(0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn strieder_series_limits_and_monotonicity() {
        // Far separation: two independent pores, C -> 4/pi.
        assert_relative_eq!(
            strieder_capacitance(1e9).unwrap(),
            4.0 / std::f64::consts::PI,
            max_relative = 1e-9
        );
        // Competition reduces capacitance: monotone increasing in d.
        let mut prev = strieder_capacitance(2.5).unwrap();
        let mut d = 2.6;
        while d < 60.0 {
            let c = strieder_capacitance(d).unwrap();
            assert!(c > prev, "series not monotone at d = {d}");
            prev = c;
            d += 0.1;
        }
        assert!(strieder_capacitance(2.0).is_err());
    }

    #[test]
    fn robin_kappa_behavior() {
        let a = 0.0885;
        // Increasing in sigma at fixed a.
        let mut prev = 0.0;
        for i in 1..=20 {
            let sigma = 0.01 * i as f64;
            let k = robin_kappa(sigma, a, 1.0).unwrap();
            assert!(k > prev);
            prev = k;
        }
        // Small-a growth ~ 1/a at fixed sigma.
        let k1 = robin_kappa(0.1, 1e-6, 1.0).unwrap();
        let expect = 4.0 * 0.1 / (std::f64::consts::PI * 1e-6)
            / (1.0 - 4.0 * (0.1_f64).sqrt() / std::f64::consts::PI);
        assert_relative_eq!(k1, expect, max_relative = 1e-3);
    }

    #[test]
    fn homog_sphere_limits_and_self_consistency() {
        let (r, d) = (2.5, 1.0);
        let kappa = robin_kappa(0.1, 0.0885, d).unwrap();
        // t -> infinity: F -> 1/((1 + D/kappa) R).
        let (_, f_inf) = homog_sphere(1e12, r, kappa, d).unwrap();
        assert_relative_eq!(f_inf, 1.0 / ((1.0 + d / kappa) * r), max_relative = 1e-5);
        // kappa -> infinity reduces to the fully absorbing sphere CDF.
        for &t in &[0.3, 2.0, 50.0] {
            let (_, f) = homog_sphere(t, r, 1e12, d).unwrap();
            let (_, cdf) = sphere_arrival(t, r, d).unwrap();
            assert_relative_eq!(f, cdf, max_relative = 1e-9);
        }
        // Numerical integral of the flux reproduces the CDF.
        for &t in &[0.5, 5.0] {
            let flux = |w: f64| homog_sphere(w, r, kappa, d).map(|x| x.0).unwrap_or(0.0);
            let integral = adaptive_simpson(&flux, 1e-12, t, 1e-10).unwrap();
            let (_, f) = homog_sphere(t, r, kappa, d).unwrap();
            assert!((integral - f).abs() < 1e-8, "t={t}: {integral} vs {f}");
        }
        // Monotone in t and bounded by 1/R.
        let mut prev = 0.0;
        for i in 1..200 {
            let t = 0.25 * i as f64;
            let (_, f) = homog_sphere(t, r, kappa, d).unwrap();
            assert!(f >= prev && f <= 1.0 / r + 1e-12);
            prev = f;
        }
    }

    #[test]
    fn sphere_arrival_properties() {
        let (r, d) = (2.0, 1.0);
        // cdf tends to 1/R.
        let (_, cdf_inf) = sphere_arrival(1e13, r, d).unwrap();
        assert_relative_eq!(cdf_inf, 0.5, max_relative = 1e-6);
        // pdf maximum at t = (R-1)^2/(6D) = 1/6.
        let t_peak = (r - 1.0) * (r - 1.0) / (6.0 * d);
        let (p0, _) = sphere_arrival(t_peak, r, d).unwrap();
        let (pm, _) = sphere_arrival(t_peak * 0.99, r, d).unwrap();
        let (pp, _) = sphere_arrival(t_peak * 1.01, r, d).unwrap();
        assert!(p0 > pm && p0 > pp);
        // cdf' = pdf by central differences.
        for &t in &[0.05, 0.4, 3.0] {
            let h = t * 1e-5;
            let (_, fp) = sphere_arrival(t + h, r, d).unwrap();
            let (_, fm) = sphere_arrival(t - h, r, d).unwrap();
            let (pdf, _) = sphere_arrival(t, r, d).unwrap();
            assert_relative_eq!((fp - fm) / (2.0 * h), pdf, max_relative = 1e-7);
        }
    }

    #[test]
    fn cube_equiv_cdf_pins() {
        // t -> infinity: C_cube / R0.
        let f = cube_equiv_cdf(1e13, 5.0, 1.0).unwrap();
        assert_relative_eq!(f, CUBE_CAPACITANCE / 5.0, max_relative = 1e-6);
        // Diffusive time scaling F(t; D) = F(Dt; 1).
        let a = cube_equiv_cdf(3.7, 5.0, 10.0).unwrap();
        let b = cube_equiv_cdf(37.0, 5.0, 1.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn differential_flux_trivial_cases() {
        let times: Vec<f64> = (1..100).map(|i| i as f64 * 0.1).collect();
        // Identical samples: Xi = 0 on occupied bins.
        let bins = differential_flux(&times, &times, 0.05, 20.0, 12).unwrap();
        for b in &bins {
            if let Some(xi) = b.xi {
                assert_eq!(xi, 0.0);
            }
        }
        // Empty bottom: Xi = 1 on occupied bins.
        let bins = differential_flux(&times, &[], 0.05, 20.0, 12).unwrap();
        for b in &bins {
            if let Some(xi) = b.xi {
                assert_eq!(xi, 1.0);
            }
        }
        // Empty bins flagged.
        let bins = differential_flux(&[1.0], &[], 0.1, 100.0, 6).unwrap();
        assert!(bins.iter().any(|b| b.xi.is_none()));
    }
}
