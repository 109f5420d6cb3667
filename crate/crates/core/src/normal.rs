//! Standard normal density, distribution and log-distribution functions that
//! stay accurate deep in both tails.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this the asymptotic series for the Mills ratio is used.
const ASYMPTOTIC_CUTOFF: f64 = -20.0;

pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Φ(z).
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Q(z) = 1 − Φ(z), computed without cancellation for large z.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// ln Φ(z).
pub fn log_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > 5.0 {
        (-sf(z)).ln_1p()
    } else if z > ASYMPTOTIC_CUTOFF {
        cdf(z).ln()
    } else if z == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        // Φ(z) = φ(z)/|z| · (1 − 1/z² + 3/z⁴ − 15/z⁶ + ...)
        let inv_z2 = 1.0 / (z * z);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..=12 {
            term *= -((2 * k - 1) as f64) * inv_z2;
            series += term;
        }
        -0.5 * z * z - (-z).ln() - HALF_LN_2PI + series.ln()
    }
}

/// ln Q(z).
pub fn log_sf(z: f64) -> f64 {
    log_cdf(-z)
}

/// `φ(γ) − γ·Q(γ)`, the standardized expected improvement below a threshold
/// `γ` standard deviations above the mean. Nonnegative for every `γ`.
pub fn expected_shortfall(gamma: f64) -> f64 {
    if gamma > 10.0 {
        (pdf(gamma) * mills_tail(gamma)).max(0.0)
    } else {
        (pdf(gamma) - gamma * sf(gamma)).max(0.0)
    }
}

/// `ln(φ(γ) − γ·Q(γ))`, finite far beyond the point where the value itself
/// underflows.
pub fn log_expected_shortfall(gamma: f64) -> f64 {
    if gamma > 10.0 {
        -0.5 * gamma * gamma - HALF_LN_2PI + mills_tail(gamma).ln()
    } else {
        expected_shortfall(gamma).ln()
    }
}

/// `1 − γ·R(γ)` with `R` the Mills ratio, expanded in `1/γ²`; accurate to
/// ~1e-8 relative for `γ > 10`.
fn mills_tail(gamma: f64) -> f64 {
    let inv = 1.0 / (gamma * gamma);
    inv * (1.0 - inv * (3.0 - inv * (15.0 - inv * (105.0 - inv * 945.0))))
}

#[allow(dead_code)]
fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}
