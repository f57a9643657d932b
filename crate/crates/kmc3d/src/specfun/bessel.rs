//! Spherical Bessel functions of the first and second kinds, and the ratio
//! k_n(alpha R)/k_n(alpha) of modified spherical Bessel functions of the
//! third kind for complex argument.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Spherical Bessel functions (j_n(w), y_n(w)) for real w > 0.
///
/// j_n is computed by downward recurrence with normalization against j_0
/// (stable for all n); y_n by upward recurrence (stable since |y_n| grows).
pub fn sph_bessel_jy(n: usize, w: f64) -> Result<(f64, f64)> {
    if !(w > 0.0) {
        return Err(Error::domain(format!("sph_bessel_jy: w = {w} must be > 0")));
    }
    let (sin_w, cos_w) = w.sin_cos();
    let j0 = sin_w / w;
    let y0 = -cos_w / w;
    if n == 0 {
        return Ok((j0, y0));
    }
    let j1 = sin_w / (w * w) - cos_w / w;
    let y1 = -cos_w / (w * w) - sin_w / w;
    if n == 1 {
        return Ok((j1, y1));
    }

    // y_n upward: y_{k+1} = (2k+1)/w * y_k - y_{k-1}
    let mut ym = y0;
    let mut yk = y1;
    for k in 1..n {
        let next = (2 * k + 1) as f64 / w * yk - ym;
        ym = yk;
        yk = next;
    }

    let jn = if (n as f64) < w {
        // Upward recurrence is stable while n < w.
        let mut jm = j0;
        let mut jk = j1;
        for k in 1..n {
            let next = (2 * k + 1) as f64 / w * jk - jm;
            jm = jk;
            jk = next;
        }
        jk
    } else {
        // Miller's downward recurrence from a padded start order.
        let start = n + (16 + (40.0 * n as f64).sqrt() as usize);
        let mut jp = 0.0_f64;
        let mut jc = 1e-280_f64;
        let mut target = 0.0;
        for k in (0..start).rev() {
            let prev = (2 * k + 3) as f64 / w * jc - jp;
            jp = jc;
            jc = prev;
            if k == n {
                target = jc;
            }
            // Rescale to dodge overflow while preserving ratios.
            if jc.abs() > 1e250 {
                jp /= 1e250;
                jc /= 1e250;
                target /= 1e250;
            }
        }
        target * (j0 / jc)
    };
    Ok((jn, yk))
}

/// k_n(alpha R) / k_n(alpha) for complex alpha (Re >= 0) and R > 1.
///
/// Uses the closed polynomial form
/// k_n(x) = (pi/2) (e^{-x}/x) sum_{j=0}^{n} (n+j)!/(j!(n-j)!) (2x)^{-j},
/// arranged so the overall factor e^{-alpha(R-1)}/R multiplies a ratio of
/// finite polynomial sums. The two sums are evaluated with a shared
/// logarithmic rescaling so the ratio stays finite even when individual
/// terms would overflow f64 (large n, small |alpha|).
pub fn kn_ratio(n: usize, alpha: Complex64, ratio_r: f64) -> Result<Complex64> {
    if !(ratio_r > 1.0) {
        return Err(Error::domain(format!(
            "kn_ratio: R = {ratio_r} must be > 1"
        )));
    }
    if alpha.norm_sqr() == 0.0 {
        return Err(Error::domain("kn_ratio: alpha must be nonzero".to_string()));
    }
    let prefactor = (-alpha * (ratio_r - 1.0)).exp() / ratio_r;
    if n == 0 {
        return Ok(prefactor);
    }

    // ln a_j for a_j = (n+j)!/(j!(n-j)!), built incrementally.
    let mut log_a = Vec::with_capacity(n + 1);
    log_a.push(0.0_f64);
    for j in 0..n {
        let step = ((n + j + 1) as f64 * (n - j) as f64 / (j + 1) as f64).ln();
        log_a.push(log_a[j] + step);
    }

    let x_den = 2.0 * alpha;
    let x_num = x_den * ratio_r;
    let log_abs_den = x_den.norm().ln();

    // Largest term magnitude in the denominator sum sets the common scale;
    // numerator terms are smaller by R^{-j}, so the same scale covers both.
    let mut l_star = f64::NEG_INFINITY;
    for (j, la) in log_a.iter().enumerate() {
        l_star = l_star.max(la - j as f64 * log_abs_den);
    }

    if l_star < 500.0 {
        // Direct evaluation is safe: accumulate t_{j+1} = t_j * c_j / x.
        let mut num = Complex64::new(1.0, 0.0);
        let mut den = Complex64::new(1.0, 0.0);
        let mut tn = Complex64::new(1.0, 0.0);
        let mut td = Complex64::new(1.0, 0.0);
        for j in 0..n {
            let c = (n + j + 1) as f64 * (n - j) as f64 / (j + 1) as f64;
            tn = tn * c / x_num;
            td = td * c / x_den;
            num += tn;
            den += td;
        }
        Ok(prefactor * num / den)
    } else {
        let log_num = x_num.ln();
        let log_den = x_den.ln();
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for (j, la) in log_a.iter().enumerate() {
            let jf = j as f64;
            num += (Complex64::new(la - l_star, 0.0) - log_num * jf).exp();
            den += (Complex64::new(la - l_star, 0.0) - log_den * jf).exp();
        }
        Ok(prefactor * num / den)
    }
}
