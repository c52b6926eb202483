use std::f64::consts::PI;

use super::EULER_GAMMA;
use crate::error::{Error, Result};

/// Arguments at or below this use the ascending series, above it Steed's
/// continued fraction.
const SERIES_CUTOVER: f64 = 2.0;
const SERIES_REL_TOL: f64 = 1e-16;
const MAX_SERIES_TERMS: usize = 200;
const CF_REL_TOL: f64 = 1e-16;
const MAX_CF_ITERS: usize = 10_000;

fn check_arg(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("K1 requires x > 0, got {x}")))
    }
}

/// Non-singular part of the ascending series,
/// `K1(x) - 1/x = sum_l (x/2)^(2l+1) / (l!(l+1)!) * [ln(x/2) + C - (H_l + H_(l+1))/2]`.
fn ascending_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let half_sq = half * half;
    let log_half = half.ln();
    let mut power = half; // (x/2)^(2l+1) / (l!(l+1)!)
    let mut h_l = 0.0;
    let mut h_next = 1.0;
    let mut sum = 0.0;
    for l in 0..MAX_SERIES_TERMS {
        let term = power * (log_half + EULER_GAMMA - 0.5 * (h_l + h_next));
        sum += term;
        if l > 0 && term.abs() <= SERIES_REL_TOL * sum.abs() {
            break;
        }
        let lf = l as f64;
        power *= half_sq / ((lf + 1.0) * (lf + 2.0));
        h_l = h_next;
        h_next += 1.0 / (lf + 2.0);
    }
    sum
}

/// `e^x K1(x)` by Steed's continued fraction (Temme's CF2), valid for x >= 2.
fn continued_fraction_scaled(x: f64) -> f64 {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_CF_ITERS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let q_new = (q1 - b * q2) / a;
        q1 = q2;
        q2 = q_new;
        q += c * q_new;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < CF_REL_TOL {
            break;
        }
    }
    h *= a1;
    let k0_scaled = (PI / (2.0 * x)).sqrt() / s;
    k0_scaled * (x + 0.5 - h) / x
}

/// Modified Bessel function of the second kind, order one.
///
/// Uses the ascending series (with its `1/x` pole, logarithmic term and
/// Euler's constant) for `x <= 2` and a continued fraction beyond.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x <= SERIES_CUTOVER {
        Ok(1.0 / x + ascending_series(x))
    } else {
        Ok(continued_fraction_scaled(x) * (-x).exp())
    }
}

/// Exponentially scaled `e^x K1(x)`; finite for all x > 0.
pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x <= SERIES_CUTOVER {
        Ok((1.0 / x + ascending_series(x)) * x.exp())
    } else if x.is_infinite() {
        Ok(0.0)
    } else {
        Ok(continued_fraction_scaled(x))
    }
}

/// `x K1(x) - 1`, accurate near zero where `x K1(x) -> 1`. Returns 0 at x = 0.
pub fn x_k1_minus_one(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    check_arg(x)?;
    if x <= SERIES_CUTOVER {
        Ok(x * ascending_series(x))
    } else {
        Ok(x * bessel_k1(x)? - 1.0)
    }
}
