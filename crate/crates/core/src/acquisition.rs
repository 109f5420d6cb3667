//! Selection rules over a finite candidate grid.
//!
//! GP-PI and EST share one scoring path: both pick the candidate with the
//! smallest standardized gap `γ(x) = (θ − μ(x)) / σ(x)` to a target `θ`,
//! EST using the estimated maximum `m̂` as its target. All reductions break
//! ties towards the lowest index.

use crate::error::{Error, Result};
use crate::gp::Prediction;
use crate::max_value::MaxEstimate;
use crate::normal::{expected_shortfall, log_cdf, log_expected_shortfall, log_sf};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Threshold rule for expected improvement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaRule {
    /// `θ_t = max_τ y_τ`.
    #[default]
    BestObserved,
    /// `θ_t = max_τ y_τ + ε`.
    BestObservedPlusEps(f64),
}

impl ThetaRule {
    pub fn threshold(&self, best: f64) -> f64 {
        match *self {
            ThetaRule::BestObserved => best,
            ThetaRule::BestObservedPlusEps(eps) => best + eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AcquisitionKind {
    Ucb {
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Ei {
        #[serde(default)]
        theta: ThetaRule,
    },
    Pi {
        #[serde(default = "default_pi_epsilon")]
        epsilon: f64,
    },
    /// EST with `m̂` by numerical integration.
    EstNumeric,
    /// EST with `m̂` from the two-point Gaussian fit of the integrand.
    EstLaplace,
    /// EST with the unanchored estimator that also integrates the lower tail.
    EstExact,
    Random {
        #[serde(default)]
        seed: u64,
    },
}

fn default_delta() -> f64 {
    0.01
}

fn default_pi_epsilon() -> f64 {
    0.1
}

impl AcquisitionKind {
    pub fn ucb() -> Self {
        AcquisitionKind::Ucb { delta: default_delta() }
    }

    pub fn pi() -> Self {
        AcquisitionKind::Pi { epsilon: default_pi_epsilon() }
    }

    pub fn ei() -> Self {
        AcquisitionKind::Ei { theta: ThetaRule::BestObserved }
    }

    /// Short name used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            AcquisitionKind::Ucb { .. } => "UCB",
            AcquisitionKind::Ei { .. } => "EI",
            AcquisitionKind::Pi { .. } => "PI",
            AcquisitionKind::EstNumeric => "ESTn",
            AcquisitionKind::EstLaplace => "ESTa",
            AcquisitionKind::EstExact => "ESTe",
            AcquisitionKind::Random { .. } => "Rand",
        }
    }

    pub fn is_est(&self) -> bool {
        matches!(self, AcquisitionKind::EstNumeric | AcquisitionKind::EstLaplace | AcquisitionKind::EstExact)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AcquisitionKind::Ucb { delta } if !(delta > 0.0 && delta < 1.0) => {
                Err(Error::invalid(format!("UCB delta must lie in (0, 1), got {delta}")))
            }
            AcquisitionKind::Pi { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                Err(Error::invalid(format!("PI epsilon must be nonnegative, got {epsilon}")))
            }
            AcquisitionKind::Ei { theta: ThetaRule::BestObservedPlusEps(eps) } if !(eps >= 0.0 && eps.is_finite()) => {
                Err(Error::invalid(format!("EI epsilon must be nonnegative, got {eps}")))
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    /// Strategy-specific score of the winner (UCB value, EI, γ, ...).
    pub score: f64,
    pub m_hat: Option<f64>,
    /// `min_x (m̂ − μ(x)) / σ(x)`, EST only.
    pub nu_t: Option<f64>,
    /// UCB exploration weight, or the weight EST implicitly uses.
    pub lambda_equiv: Option<f64>,
    /// PI target, or the target EST implicitly uses.
    pub theta_equiv: Option<f64>,
}

impl Selection {
    fn bare(index: usize, score: f64) -> Self {
        Self { index, score, m_hat: None, nu_t: None, lambda_equiv: None, theta_equiv: None }
    }
}

/// Index of the largest value; NaN never wins, ties go to the lowest index.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Standardized gaps `γ(x) = (θ − μ(x)) / σ(x)`.
pub fn standardized_gaps(stats: &Prediction, theta: f64) -> impl Iterator<Item = f64> + '_ {
    stats.means.iter().zip(&stats.stds).map(move |(m, s)| (theta - m) / s)
}

/// `λ_t = sqrt(2 ln(|X| π² t² / (6δ)))`.
pub fn ucb_lambda(t: usize, grid_size: usize, delta: f64) -> f64 {
    let t = t as f64;
    (2.0 * (grid_size as f64 * PI * PI * t * t / (6.0 * delta)).ln()).sqrt()
}

/// `argmax_x μ(x) + λ σ(x)` for a given weight.
pub fn ucb_select_with_lambda(stats: &Prediction, lambda: f64) -> Selection {
    let (index, score) = argmax(stats.means.iter().zip(&stats.stds).map(|(m, s)| m + lambda * s));
    Selection { lambda_equiv: Some(lambda), ..Selection::bare(index, score) }
}

pub fn ucb_select(stats: &Prediction, t: usize, grid_size: usize, delta: f64) -> Result<Selection> {
    if t == 0 || grid_size == 0 {
        return Err(Error::invalid("UCB needs t >= 1 and a nonempty grid"));
    }
    Ok(ucb_select_with_lambda(stats, ucb_lambda(t, grid_size, delta)))
}

/// `EI(x) = [φ(γ) − γ Q(γ)] σ(x)` with `γ = (θ − μ(x)) / σ(x)`.
pub fn expected_improvement(mean: f64, std: f64, theta: f64) -> f64 {
    expected_shortfall((theta - mean) / std) * std
}

/// `argmax_x EI(x)`, ranked in log space so thresholds far above every mean
/// still discriminate between candidates.
pub fn ei_select(stats: &Prediction, theta: f64) -> Selection {
    let (index, log_score) = argmax(
        stats
            .means
            .iter()
            .zip(&stats.stds)
            .map(|(&m, &s)| log_expected_shortfall((theta - m) / s) + s.ln()),
    );
    Selection { theta_equiv: Some(theta), ..Selection::bare(index, log_score.exp()) }
}

/// `argmin_x (θ − μ(x)) / σ(x)`, i.e. the largest probability of improvement
/// over `θ`.
pub fn pi_select(stats: &Prediction, theta: f64) -> Selection {
    let (index, gap) = argmin(standardized_gaps(stats, theta));
    Selection { theta_equiv: Some(theta), ..Selection::bare(index, gap) }
}

/// EST: PI with target `m̂`, recording `ν_t` and the equivalent UCB weight.
pub fn est_select(stats: &Prediction, estimate: &MaxEstimate) -> Result<Selection> {
    est_select_with_target(stats, estimate.value)
}

pub fn est_select_with_target(stats: &Prediction, m_hat: f64) -> Result<Selection> {
    if !m_hat.is_finite() {
        return Err(Error::invalid("m_hat must be finite"));
    }
    let base = pi_select(stats, m_hat);
    Ok(Selection {
        m_hat: Some(m_hat),
        nu_t: Some(base.score),
        lambda_equiv: Some(base.score),
        ..base
    })
}

/// `ln Pr[M_x | m̂, D] ≈ ln Q(γ(x)) + Σ_{x'≠x} ln Φ(γ(x'))` for every
/// candidate, with `γ = (m̂ − μ) / σ`.
pub fn est_prob_exact(stats: &Prediction, m_hat: f64) -> Vec<f64> {
    let gaps: Vec<f64> = standardized_gaps(stats, m_hat).collect();
    let log_cdfs: Vec<f64> = gaps.iter().map(|&g| log_cdf(g)).collect();
    let total: f64 = log_cdfs.iter().sum();
    gaps.iter()
        .zip(&log_cdfs)
        .map(|(&g, &lc)| log_sf(g) + (total - lc))
        .collect()
}

/// Uniform draw over the grid.
pub fn random_select<R: Rng + ?Sized>(grid_size: usize, rng: &mut R) -> Result<Selection> {
    if grid_size == 0 {
        return Err(Error::invalid("random selection needs a nonempty grid"));
    }
    Ok(Selection::bare(rng.random_range(0..grid_size), f64::NAN))
}
