//! Error function family: `erf`, `erfc`, scaled `erfcx` and the inverse
//! complementary error function.
//!
//! The forward functions follow W. J. Cody's rational minimax scheme
//! (SPECFUN `calerf`), which is accurate to close to machine epsilon over the
//! whole real line. The inverse uses a rational initial guess refined by two
//! Newton steps on `erfc`.

use crate::error::{Error, Result};

const SQRT_PI_INV: f64 = 0.564_189_583_547_756_3; // 1/sqrt(pi)
const THRESH: f64 = 0.46875;

// Coefficients for erf(x), |x| <= 0.46875.
const A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];

// Coefficients for erfc(x), 0.46875 < x <= 4.
const C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];

// Coefficients for erfc(x), x > 4.
const P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

/// exp(x^2) * erfc(|x|) for |x| > 0.46875, evaluated without under/overflow.
fn erfcx_tail(y: f64) -> f64 {
    if y <= 4.0 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        (xnum + C[7]) / (xden + D[7])
    } else {
        let z = 1.0 / (y * y);
        let mut xnum = P[5] * z;
        let mut xden = z;
        for i in 0..4 {
            xnum = (xnum + P[i]) * z;
            xden = (xden + Q[i]) * z;
        }
        let r = z * (xnum + P[4]) / (xden + Q[4]);
        (SQRT_PI_INV - r) / y
    }
}

/// exp(-y^2) computed as exp(-ysq^2)*exp(-del) with ysq = trunc(16 y)/16,
/// which recovers the last couple of bits that a naive `(-y*y).exp()` loses.
fn exp_neg_sq(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESH {
        let z = y * y;
        let mut xnum = A[4] * z;
        let mut xden = z;
        for i in 0..3 {
            xnum = (xnum + A[i]) * z;
            xden = (xden + B[i]) * z;
        }
        x * (xnum + A[3]) / (xden + B[3])
    } else {
        let e = 1.0 - exp_neg_sq(y) * erfcx_tail(y);
        if x < 0.0 {
            -e
        } else {
            e
        }
    }
}

/// Complementary error function, erfc(x) = 1 - erf(x).
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESH {
        1.0 - erf(x)
    } else {
        let r = exp_neg_sq(y) * erfcx_tail(y);
        if x < 0.0 {
            2.0 - r
        } else {
            r
        }
    }
}

/// Scaled complementary error function, erfcx(x) = exp(x^2) erfc(x).
///
/// Stays O(1/x) for large positive x where `erfc` underflows; this is what
/// the homogenized-sphere flux needs to remain finite.
pub fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    let r = if y <= THRESH {
        (y * y).exp() * (1.0 - erf(y))
    } else {
        erfcx_tail(y)
    };
    if x < 0.0 {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows for x < ~ -26.6, as it must.
        2.0 * (y * y).exp() - r
    } else {
        r
    }
}

/// Inverse complementary error function: returns x with erfc(x) = y.
///
/// Sign convention: erfc_inv(1) = 0 and erfc_inv(y) > 0 for y < 1. A rational
/// approximation of the normal quantile supplies the initial guess; two
/// Newton steps on `erfc` polish it to ~1e-15 relative.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::domain(format!("erfc_inv: y = {y} outside (0, 2)")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    // Odd symmetry: erfc_inv(2 - y) = -erfc_inv(y).
    if y > 1.0 {
        return Ok(-erfc_inv(2.0 - y)?);
    }
    // erfc(x) = y  <=>  x = -Phi^{-1}(y/2)/sqrt(2); Acklam's rational
    // approximation of the standard normal quantile (rel. err ~1.15e-9).
    let p = 0.5 * y;
    let x0 = -normal_quantile_approx(p) / std::f64::consts::SQRT_2;
    let mut x = x0;
    for _ in 0..2 {
        // f(x) = erfc(x) - y, f'(x) = -2/sqrt(pi) exp(-x^2).
        let f = erfc(x) - y;
        let fp = -2.0 * SQRT_PI_INV * (-x * x).exp();
        if fp == 0.0 {
            break;
        }
        x -= f / fp;
    }
    Ok(x)
}

/// Acklam's rational approximation of the standard normal quantile for
/// p in (0, 0.5]. Used only as a Newton starting point.
fn normal_quantile_approx(p: f64) -> f64 {
    const PA: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const QA: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const CA: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const DA: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((CA[0] * q + CA[1]) * q + CA[2]) * q + CA[3]) * q + CA[4]) * q + CA[5])
            / ((((DA[0] * q + DA[1]) * q + DA[2]) * q + DA[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((PA[0] * r + PA[1]) * r + PA[2]) * r + PA[3]) * r + PA[4]) * r + PA[5]) * q
            / (((((QA[0] * r + QA[1]) * r + QA[2]) * r + QA[3]) * r + QA[4]) * r + 1.0)
    }
}
