//! Normal-distribution oracle sharing no code with the crate: erf from its
//! Maclaurin series near zero, erfc from a Lentz continued fraction in the
//! tails.

use std::f64::consts::PI;

fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x * x / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

fn erfc_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

pub fn erfc(x: f64) -> f64 {
    if x.abs() < 2.0 {
        1.0 - erf_series(x)
    } else if x > 0.0 {
        erfc_fraction(x)
    } else {
        2.0 - erfc_fraction(-x)
    }
}

/// `Φ(z)`.
#[allow(dead_code)]
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / 2f64.sqrt())
}

/// `1 − Φ(z)`.
#[allow(dead_code)]
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z / 2f64.sqrt())
}
