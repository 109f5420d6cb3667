//! Estimators of the maximum value `m̂ = E[max_x f(x) | D]` under the
//! approximation that the candidates' posterior marginals are independent.
//!
//! With `g(w) = 1 − Π_x Φ((w − μ(x)) / σ(x))` the probability that some
//! candidate exceeds `w`, the anchored estimator is
//! `m̂ = m₀ + ∫_{m₀}^∞ g(w) dw` with `m₀` the best observation so far.

use crate::error::{Error, Result};
use crate::gp::Prediction;
use crate::normal::log_cdf;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Integration stops once `g` drops below this.
pub const TAIL_EPS: f64 = 1e-10;
/// Upper integration limit is `max_x μ(x) + UPPER_SIGMAS·σ(x)`.
pub const UPPER_SIGMAS: f64 = 8.0;
/// Cap on the number of quadrature intervals per integral.
pub const MAX_INTERVALS: usize = 20_000;
/// Below this `g(m₀)` there is no improvement mass to fit.
pub const G_EPS: f64 = 1e-12;
/// Floor for the Laplace probe offset.
pub const PROBE_FLOOR: f64 = 1e-6;

// Candidates more than this many standard deviations below the integration
// range contribute less than 1e-19 to ln Π Φ and are skipped.
const NEGLIGIBLE_SIGMAS: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxMethod {
    Numeric,
    Laplace,
    ExactNoisy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxEstimate {
    pub value: f64,
    /// Lower anchor of the integral (best observation, or its stand-in).
    pub m0: f64,
    pub method: MaxMethod,
    /// Integral of the upper-tail term. Never negative.
    pub integral_mass: f64,
    /// Integral of the lower-tail term; only the unanchored estimator has one.
    pub lower_mass: f64,
    pub n_quadrature_points: usize,
    /// The Laplace fit was degenerate and numeric integration was used.
    pub fallback: bool,
}

/// Lipschitz constant `L` of `f` and covering radius `ρ` of the grid. The
/// threshold in `g` is lowered by `ρ·L` so that `m̂` accounts for values
/// between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzSpec {
    pub constant: f64,
    pub rho: f64,
}

impl LipschitzSpec {
    pub fn new(constant: f64, rho: f64) -> Result<Self> {
        if !(constant >= 0.0 && rho >= 0.0 && constant.is_finite() && rho.is_finite()) {
            return Err(Error::invalid(format!("Lipschitz constant and radius must be nonnegative, got L={constant}, rho={rho}")));
        }
        Ok(Self { constant, rho })
    }

    pub fn margin(&self) -> f64 {
        self.constant * self.rho
    }
}

fn check_stats(means: &[f64], stds: &[f64]) -> Result<()> {
    if means.len() != stds.len() {
        return Err(Error::DimensionMismatch { expected: means.len(), got: stds.len() });
    }
    if means.is_empty() {
        return Err(Error::invalid("need at least one candidate"));
    }
    if means.iter().any(|m| !m.is_finite()) || stds.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("means must be finite and standard deviations positive"));
    }
    Ok(())
}

/// Candidates relevant on `[lo, ∞)` for thresholds shifted by `margin`.
struct Product {
    centers: Vec<f64>,
    inv_stds: Vec<f64>,
    min_std: f64,
}

impl Product {
    fn new(means: &[f64], stds: &[f64], margin: f64, lo: f64) -> Self {
        let mut p = Product { centers: vec![], inv_stds: vec![], min_std: f64::INFINITY };
        for (&m, &s) in means.iter().zip(stds) {
            if m + margin + NEGLIGIBLE_SIGMAS * s >= lo {
                p.centers.push(m + margin);
                p.inv_stds.push(1.0 / s);
                p.min_std = p.min_std.min(s);
            }
        }
        p
    }

    /// `ln Π_x Φ((w − c(x)) / σ(x))`.
    fn log_prod(&self, w: f64) -> f64 {
        let mut acc = 0.0;
        for (&c, &inv) in self.centers.iter().zip(&self.inv_stds) {
            let z = (w - c) * inv;
            if z < NEGLIGIBLE_SIGMAS {
                acc += log_cdf(z);
            }
        }
        acc
    }

    fn exceed(&self, w: f64) -> f64 {
        -self.log_prod(w).exp_m1()
    }
}

/// `g(w) = 1 − Π_x Φ((w − margin − μ(x)) / σ(x))`, evaluated in log space.
pub fn g_integrand(means: &[f64], stds: &[f64], w: f64, margin: f64) -> f64 {
    let mut acc = 0.0;
    for (&m, &s) in means.iter().zip(stds) {
        acc += log_cdf((w - margin - m) / s);
    }
    -acc.exp_m1()
}

/// Composite Simpson rule for a nonincreasing, nonnegative integrand on
/// `[a, b]` with spacing close to `h_target`. Stops early once the integrand
/// falls below [`TAIL_EPS`] at an even node. Returns the integral and the
/// number of integrand evaluations.
fn simpson_decreasing(f: impl Fn(f64) -> f64, a: f64, b: f64, h_target: f64) -> (f64, usize) {
    if b <= a {
        return (0.0, 0);
    }
    let mut n = ((b - a) / h_target).ceil().min(MAX_INTERVALS as f64) as usize;
    n = n.max(2);
    n += n % 2;
    let h = (b - a) / n as f64;
    let f0 = f(a);
    let mut evals = 1;
    // sum of interior weights so far, excluding the last even node
    let mut acc = f0;
    let mut i = 1;
    while i < n {
        let odd = f(a + i as f64 * h);
        let even = f(a + (i + 1) as f64 * h);
        evals += 2;
        acc += 4.0 * odd;
        if i + 1 == n || even < TAIL_EPS {
            acc += even;
            break;
        }
        acc += 2.0 * even;
        i += 2;
    }
    (acc * h / 3.0, evals)
}

/// Anchored estimator `m̂ = m₀ + ∫_{m₀}^∞ g(w) dw` by numerical quadrature.
pub fn m_hat_numeric(stats: &Prediction, m0: f64, lip: Option<&LipschitzSpec>) -> Result<MaxEstimate> {
    let (means, stds) = (&stats.means, &stats.stds);
    check_stats(means, stds)?;
    if !m0.is_finite() {
        return Err(Error::invalid("m0 must be finite"));
    }
    let margin = lip.map_or(0.0, LipschitzSpec::margin);
    let upper = means
        .iter()
        .zip(stds)
        .map(|(m, s)| m + UPPER_SIGMAS * s)
        .fold(f64::NEG_INFINITY, f64::max)
        + margin;
    let product = Product::new(means, stds, margin, m0);
    let (mass, n) = if product.centers.is_empty() {
        (0.0, 0)
    } else {
        simpson_decreasing(|w| product.exceed(w), m0, upper, product.min_std / 4.0)
    };
    Ok(MaxEstimate {
        value: m0 + mass,
        m0,
        method: MaxMethod::Numeric,
        integral_mass: mass,
        lower_mass: 0.0,
        n_quadrature_points: n,
        fallback: false,
    })
}

/// Unanchored estimator `E[Y] = ∫₀^∞ P(Y > y) − P(Y < −y) dy` for
/// `Y = max_x f(x)` with independent marginals. Can fall below `m0_hint`,
/// which is only recorded.
pub fn m_hat_exact_noisy(stats: &Prediction, m0_hint: f64) -> Result<MaxEstimate> {
    let (means, stds) = (&stats.means, &stats.stds);
    check_stats(means, stds)?;
    let upper_limit = means
        .iter()
        .zip(stds)
        .map(|(m, s)| m + UPPER_SIGMAS * s)
        .fold(0.0, f64::max);
    let lower_limit = means
        .iter()
        .zip(stds)
        .map(|(m, s)| UPPER_SIGMAS * s - m)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let upper_product = Product::new(means, stds, 0.0, 0.0);
    let (upper_mass, n_up) = if upper_product.centers.is_empty() {
        (0.0, 0)
    } else {
        simpson_decreasing(|y| upper_product.exceed(y), 0.0, upper_limit, upper_product.min_std / 4.0)
    };
    // P(Y < −y) = Π Φ((−y − μ)/σ); every candidate matters here.
    let all = Product::new(means, stds, 0.0, f64::NEG_INFINITY);
    let (lower_mass, n_low) =
        simpson_decreasing(|y| all.log_prod(-y).exp(), 0.0, lower_limit, all.min_std / 4.0);
    Ok(MaxEstimate {
        value: upper_mass - lower_mass,
        m0: m0_hint,
        method: MaxMethod::ExactNoisy,
        integral_mass: upper_mass,
        lower_mass,
        n_quadrature_points: n_up + n_low,
        fallback: false,
    })
}

/// Two-point Gaussian fit of the integrand: `ĝ(w) = a·exp(−(w − m₀)²/2b²)`
/// with `a = g(m₀)` and `b` matched at `m₀ + median(σ)`, integrated
/// analytically over `[m₀, ∞)`.
pub fn m_hat_laplace(stats: &Prediction, m0: f64) -> Result<MaxEstimate> {
    let (means, stds) = (&stats.means, &stats.stds);
    check_stats(means, stds)?;
    if !m0.is_finite() {
        return Err(Error::invalid("m0 must be finite"));
    }
    let a = g_integrand(means, stds, m0, 0.0);
    if a <= G_EPS {
        return Ok(MaxEstimate {
            value: m0,
            m0,
            method: MaxMethod::Laplace,
            integral_mass: 0.0,
            lower_mass: 0.0,
            n_quadrature_points: 1,
            fallback: false,
        });
    }
    let mut sorted = stds.clone();
    sorted.sort_by(f64::total_cmp);
    let offset = sorted[(sorted.len() - 1) / 2].max(PROBE_FLOOR);
    let g1 = g_integrand(means, stds, m0 + offset, 0.0);
    if !(g1 > 0.0 && g1 < a) {
        let numeric = m_hat_numeric(stats, m0, None)?;
        return Ok(MaxEstimate {
            method: MaxMethod::Laplace,
            fallback: true,
            n_quadrature_points: numeric.n_quadrature_points + 2,
            ..numeric
        });
    }
    let b2 = -offset * offset / (2.0 * (g1 / a).ln());
    let mass = a * b2.sqrt() * (PI / 2.0).sqrt();
    Ok(MaxEstimate {
        value: m0 + mass,
        m0,
        method: MaxMethod::Laplace,
        integral_mass: mass,
        lower_mass: 0.0,
        n_quadrature_points: 2,
        fallback: false,
    })
}

/// Stand-in for `m₀` when nothing has been observed: a level below which
/// every candidate has negligible mass, so the anchored integral recovers
/// the full expectation.
pub fn prior_anchor(stats: &Prediction) -> f64 {
    stats
        .means
        .iter()
        .zip(&stats.stds)
        .map(|(m, s)| m - UPPER_SIGMAS * s)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::{cdf, INV_SQRT_2PI};

    fn pred(means: &[f64], stds: &[f64]) -> Prediction {
        Prediction::new(means.to_vec(), stds.to_vec()).unwrap()
    }

    #[test]
    fn g_limits() {
        let means = [0.3, -1.0, 2.0];
        let stds = [0.5, 1.0, 0.2];
        let w = -1.0 - 40.0 * 1.0;
        assert!((g_integrand(&means, &stds, w, 0.0) - 1.0).abs() < 1e-12);
        assert!((g_integrand(&[0.0], &[1.0], 0.0, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn g_matches_naive_product() {
        let means = [0.3, -1.0, 2.0];
        let stds = [0.5, 1.0, 0.2];
        for &w in &[-2.0, 0.0, 1.5, 2.2, 3.0] {
            let naive = 1.0 - means.iter().zip(&stds).map(|(m, s)| cdf((w - m) / s)).product::<f64>();
            assert!((g_integrand(&means, &stds, w, 0.0) - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_single_standard_normal() {
        let est = m_hat_numeric(&pred(&[0.0], &[1.0]), 0.0, None).unwrap();
        assert!((est.value - INV_SQRT_2PI).abs() < 1e-4, "{}", est.value);
        assert_eq!(est.method, MaxMethod::Numeric);
        assert!(est.integral_mass >= 0.0);
    }

    #[test]
    fn numeric_degenerate_posterior_returns_m0() {
        let s = crate::gp::VAR_FLOOR.sqrt();
        let est = m_hat_numeric(&pred(&[0.1, 0.4, -2.0], &[s, s, s]), 0.5, None).unwrap();
        assert!((est.value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn exact_noisy_reference_cases() {
        let est = m_hat_exact_noisy(&pred(&[0.0], &[1.0]), 0.0).unwrap();
        assert!(est.value.abs() < 1e-4, "{}", est.value);
        let est = m_hat_exact_noisy(&pred(&[2.0], &[1e-6]), 0.0).unwrap();
        assert!((est.value - 2.0).abs() < 1e-4, "{}", est.value);
        let est = m_hat_exact_noisy(&pred(&[-3.0], &[0.5]), 0.0).unwrap();
        assert!((est.value + 3.0).abs() < 1e-4, "{}", est.value);
        assert_eq!(est.method, MaxMethod::ExactNoisy);
    }

    #[test]
    fn laplace_single_candidate() {
        let est = m_hat_laplace(&pred(&[0.0], &[1.0]), 0.0).unwrap();
        assert!(!est.fallback);
        assert!(((est.value - INV_SQRT_2PI) / INV_SQRT_2PI).abs() < 0.15, "{}", est.value);
        // a = g(m0) = 1 - Φ(0)
        let b = est.integral_mass / (0.5 * (PI / 2.0).sqrt());
        assert!(b > 0.0 && b < 1.0);
    }

    #[test]
    fn laplace_degenerate_posterior() {
        let est = m_hat_laplace(&pred(&[-5.0, -6.0], &[1e-3, 1e-3]), 1.0).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(!est.fallback);
    }

    #[test]
    fn laplace_falls_back_when_probe_does_not_decay() {
        // g stays at 1 up to w = 10 while the probe sits at m0 + 1e-3.
        let est = m_hat_laplace(&pred(&[10.0, 0.0, 0.0], &[1e-6, 1e-3, 1e-3]), 0.0).unwrap();
        assert!(est.fallback);
        assert!((est.value - 10.0).abs() < 1e-3, "{}", est.value);
    }

    #[test]
    fn lipschitz_margin_raises_estimate() {
        let p = pred(&[0.0, 0.5], &[0.3, 0.2]);
        let base = m_hat_numeric(&p, 0.4, None).unwrap();
        let lip = LipschitzSpec::new(2.0, 0.05).unwrap();
        let corrected = m_hat_numeric(&p, 0.4, Some(&lip)).unwrap();
        assert!(corrected.value > base.value);
        assert!(LipschitzSpec::new(-1.0, 0.1).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = pred(&[0.0], &[1.0]);
        assert!(m_hat_numeric(&p, f64::NAN, None).is_err());
        let bad = Prediction { means: vec![0.0], stds: vec![0.0] };
        assert!(m_hat_numeric(&bad, 0.0, None).is_err());
    }
}
