//! Regularized incomplete beta function and the Student-t CDF built on it.

use crate::error::{Error, Result};

/// ln Gamma(x) for x > 0 (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    let mut yy = y;
    for c in COEF {
        yy += 1.0;
        ser += c / yy;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Continued-fraction kernel for the incomplete beta (modified Lentz).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::input("incomplete beta requires a, b > 0"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::input(format!("incomplete beta argument x={x} outside [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * betacf(a, b, x) / a)
    } else {
        Ok(1.0 - front * betacf(b, a, 1.0 - x) / b)
    }
}

/// CDF of the Student-t distribution with `df` degrees of freedom.
///
/// F(0) = 0.5 exactly and F(-t) = 1 - F(t) by construction.
pub fn student_t_cdf(t: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::input("t CDF requires df >= 1"));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let nu = df as f64;
    let x = nu / (nu + t * t);
    let tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, x)?;
    if t > 0.0 {
        Ok(1.0 - tail)
    } else {
        Ok(tail)
    }
}

/// Upper-p quantile of the Student-t distribution, found by bisection on
/// the CDF.
pub fn student_t_quantile(p: f64, df: usize) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::input(format!("quantile probability {p} outside (0, 1)")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // solve for the upper half, mirror for the lower
    let target = if p > 0.5 { p } else { 1.0 - p };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while student_t_cdf(hi, df)? < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::numerical("t quantile bracket expansion failed"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    let q = 0.5 * (lo + hi);
    Ok(if p > 0.5 { q } else { -q })
}
