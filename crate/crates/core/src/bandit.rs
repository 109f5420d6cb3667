//! The sequential select/observe/update loop, regret accounting and the
//! quantities entering the regret bounds (`ν_t`, `ζ_t`, information gain).

use crate::acquisition::{
    ei_select, est_select, pi_select, random_select, ucb_select, AcquisitionKind, Selection,
};
use crate::error::{Error, ObjectiveError, Result};
use crate::gp::{fit_posterior, CandidateGrid, GpModel, History, Point, Prediction, RefitSpec};
use crate::max_value::{m_hat_exact_noisy, m_hat_laplace, m_hat_numeric, prior_anchor, LipschitzSpec, MaxEstimate};
use crate::rng;
use nalgebra::{Cholesky, DMatrix};
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

const NOISE_STREAM: u64 = 1;
const RANDOM_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: GpModel,
    pub grid: CandidateGrid,
    pub acquisition: AcquisitionKind,
    pub max_rounds: usize,
    /// Standard deviation of the Gaussian noise added to each evaluation.
    pub observation_noise_std: f64,
    pub seed: u64,
    pub refit: Option<RefitSpec>,
    pub lipschitz: Option<LipschitzSpec>,
    /// Confidence parameter for `ζ_t`.
    pub delta: f64,
    /// Grid indices observed before round 1; not counted as rounds.
    pub warm_start: Vec<usize>,
}

impl RunConfig {
    pub fn new(model: GpModel, grid: CandidateGrid, acquisition: AcquisitionKind, max_rounds: usize) -> Self {
        Self {
            model,
            grid,
            acquisition,
            max_rounds,
            observation_noise_std: 0.0,
            seed: 0,
            refit: None,
            lipschitz: None,
            delta: 0.01,
            warm_start: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.model.check_dim(self.grid.dim())?;
        self.acquisition.validate()?;
        if self.max_rounds == 0 {
            return Err(Error::invalid("max_rounds must be at least 1"));
        }
        if !(self.observation_noise_std >= 0.0 && self.observation_noise_std.is_finite()) {
            return Err(Error::invalid("observation noise std must be nonnegative"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let Some(r) = &self.refit {
            r.validate()?;
        }
        if let Some(&i) = self.warm_start.iter().find(|&&i| i >= self.grid.len()) {
            return Err(Error::invalid(format!("warm-start index {i} outside grid of {}", self.grid.len())));
        }
        Ok(())
    }
}

/// Everything decided in one round before the objective is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub selection: Selection,
    pub estimate: Option<MaxEstimate>,
    /// `μ_{t−1}(x_t)`.
    pub mu: f64,
    /// `σ_{t−1}(x_t)`.
    pub sigma: f64,
    pub model: GpModel,
}

/// Choose the round-`t` point given everything observed so far. A pure
/// function of its arguments; the command-line `suggest` relies on this.
pub fn select_next(config: &RunConfig, history: &History, t: usize) -> Result<Step> {
    let model = match &config.refit {
        Some(refit) => refit.model_for(&config.model, history)?,
        None => config.model.clone(),
    };
    let prediction = fit_posterior(&model, history)?.predict(&config.grid)?;
    let (selection, estimate) = select_from_prediction(config, &prediction, history.best_value(), t)?;
    Ok(Step {
        mu: prediction.means[selection.index],
        sigma: prediction.stds[selection.index],
        selection,
        estimate,
        model,
    })
}

fn select_from_prediction(
    config: &RunConfig,
    prediction: &Prediction,
    best: Option<f64>,
    t: usize,
) -> Result<(Selection, Option<MaxEstimate>)> {
    // Before any observation the thresholds fall back to the prior.
    let best_or_prior_mean = || best.unwrap_or_else(|| prediction.max_mean());
    let m0 = || best.unwrap_or_else(|| prior_anchor(prediction));
    let estimate = match &config.acquisition {
        AcquisitionKind::Ucb { delta } => return Ok((ucb_select(prediction, t, config.grid.len(), *delta)?, None)),
        AcquisitionKind::Ei { theta } => return Ok((ei_select(prediction, theta.threshold(best_or_prior_mean())), None)),
        AcquisitionKind::Pi { epsilon } => return Ok((pi_select(prediction, best_or_prior_mean() + epsilon), None)),
        AcquisitionKind::Random { seed } => {
            let mut rng = rng::stream(rng::mix(rng::mix(*seed, config.seed), t as u64), RANDOM_STREAM);
            return Ok((random_select(config.grid.len(), &mut rng)?, None));
        }
        AcquisitionKind::EstNumeric => m_hat_numeric(prediction, m0(), config.lipschitz.as_ref())?,
        AcquisitionKind::EstLaplace => m_hat_laplace(prediction, m0())?,
        AcquisitionKind::EstExact => m_hat_exact_noisy(prediction, m0())?,
    };
    Ok((est_select(prediction, &estimate)?, Some(estimate)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub index: usize,
    pub x: Point,
    /// Noisy observation.
    pub y: f64,
    /// Noise-free objective value at `x`.
    pub f_value: f64,
    pub m_hat: Option<f64>,
    pub nu_t: Option<f64>,
    pub zeta_t: f64,
    pub lambda_equiv: Option<f64>,
    pub theta_equiv: Option<f64>,
    pub mu_at_choice: f64,
    pub sigma_at_choice: f64,
    /// `r̃_t = max f − f(x_t)`.
    pub instant_regret: f64,
    /// `r_t = min_{τ ≤ t} r̃_τ`.
    pub simple_regret: f64,
    /// `Σ_{τ ≤ t} r̃_τ`.
    pub cumulative_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub label: String,
    pub records: Vec<RoundRecord>,
    /// Largest objective value on the grid.
    pub f_max: f64,
    pub r_min: f64,
    /// First round attaining `r_min` (1-based).
    pub t_min: usize,
    /// `R_t = (1/t) Σ_{τ ≤ t} r̃_τ`.
    pub average_regret: Vec<f64>,
}

impl RunResult {
    pub fn simple_regret(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.simple_regret).collect()
    }

    pub fn cumulative_regret(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cumulative_regret).collect()
    }

    pub fn chosen_points(&self) -> Vec<Point> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }
}

/// Run against an objective. The objective is first swept over the whole
/// grid to get ground truth for regret accounting (a failure there is
/// reported as round 0); the acquisition only ever sees observations.
pub fn run<F>(config: &RunConfig, mut objective: F) -> Result<RunResult>
where
    F: FnMut(&[f64]) -> std::result::Result<f64, ObjectiveError>,
{
    config.validate()?;
    let mut truth = Vec::with_capacity(config.grid.len());
    for x in config.grid.points() {
        truth.push(objective(x).map_err(|source| Error::Objective { round: 0, source })?);
    }
    run_inner(config, &truth, |round, _, x| objective(x).map_err(|source| Error::Objective { round, source }))
}

/// Run against precomputed noise-free objective values on the grid.
pub fn run_with_values(config: &RunConfig, values: &[f64]) -> Result<RunResult> {
    config.validate()?;
    if values.len() != config.grid.len() {
        return Err(Error::DimensionMismatch { expected: config.grid.len(), got: values.len() });
    }
    run_inner(config, values, |_, index, _| Ok(values[index]))
}

fn run_inner(
    config: &RunConfig,
    truth: &[f64],
    mut evaluate: impl FnMut(usize, usize, &[f64]) -> Result<f64>,
) -> Result<RunResult> {
    if truth.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("objective values must be finite"));
    }
    let f_max = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut noise = rng::stream(config.seed, NOISE_STREAM);
    let mut observe = |round: usize, index: usize| -> Result<(f64, f64)> {
        let x = config.grid.point(index);
        let f = evaluate(round, index, x)?;
        let eps: f64 = StandardNormal.sample(&mut noise);
        Ok((f, f + config.observation_noise_std * eps))
    };

    let mut history = History::new();
    for &index in &config.warm_start {
        let (_, y) = observe(0, index)?;
        history.push(config.grid.point(index).to_vec(), y)?;
    }

    let mut records: Vec<RoundRecord> = Vec::with_capacity(config.max_rounds);
    let mut simple = f64::INFINITY;
    let mut cumulative = 0.0;
    for t in 1..=config.max_rounds {
        let step = select_next(config, &history, t)?;
        let index = step.selection.index;
        let x = config.grid.point(index).to_vec();
        let (f_value, y) = observe(t, index)?;
        let instant = f_max - truth[index];
        simple = simple.min(instant);
        cumulative += instant;
        history.push(x.clone(), y)?;
        records.push(RoundRecord {
            t,
            index,
            x,
            y,
            f_value,
            m_hat: step.selection.m_hat,
            nu_t: step.selection.nu_t,
            zeta_t: zeta_schedule(t, config.max_rounds, config.delta, ZetaSchedule::PiSquared)?,
            lambda_equiv: step.selection.lambda_equiv,
            theta_equiv: step.selection.theta_equiv,
            mu_at_choice: step.mu,
            sigma_at_choice: step.sigma,
            instant_regret: instant,
            simple_regret: simple,
            cumulative_regret: cumulative,
        });
    }
    let r_min = simple;
    let t_min = records.iter().position(|r| r.simple_regret == r_min).map_or(1, |p| p + 1);
    let average_regret = records.iter().map(|r| r.cumulative_regret / r.t as f64).collect();
    Ok(RunResult {
        label: config.acquisition.label().to_string(),
        records,
        f_max,
        r_min,
        t_min,
        average_regret,
    })
}

/// Choice of the weights `π_t` with `Σ 1/π_t ≤ 1` in the deviation bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaSchedule {
    /// `π_t = π² t² / 6`.
    PiSquared,
    /// `π_t = T`.
    Horizon,
}

/// `ζ_t = sqrt(2 ln(π_t / (2δ)))`.
pub fn zeta_schedule(t: usize, horizon: usize, delta: f64, schedule: ZetaSchedule) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("rounds are numbered from 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let pi_t = match schedule {
        ZetaSchedule::PiSquared => PI * PI * (t * t) as f64 / 6.0,
        ZetaSchedule::Horizon => horizon as f64,
    };
    Ok((2.0 * (pi_t / (2.0 * delta)).ln()).max(0.0).sqrt())
}

/// `½ ln det(I + σ⁻² K_A)` for the given points under `model`.
pub fn information_gain(model: &GpModel, points: &[Point]) -> Result<f64> {
    if !(model.noise_var > 0.0) {
        return Err(Error::invalid("information gain needs a positive noise variance"));
    }
    if points.is_empty() {
        return Ok(0.0);
    }
    let n = points.len();
    let m = DMatrix::identity(n, n) + model.kernel.gram(points) / model.noise_var;
    let chol = Cholesky::new(m.clone()).ok_or_else(|| Error::Factorization {
        size: n,
        jitter: 0.0,
        min_diag: m.diagonal().min(),
        max_diag: m.diagonal().max(),
        ratio: m.diagonal().max() / m.diagonal().min(),
    })?;
    Ok(chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum())
}

/// `C = 2 / ln(1 + σ⁻²)`.
pub fn bound_constant(noise_var: f64) -> f64 {
    2.0 / (1.0 + 1.0 / noise_var).ln()
}

/// Per-round and cumulative regret-bound diagnostics for an EST run.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `(ν_t + ζ_t)·σ_{t−1}(x_t) − r̃_t` per round.
    pub margins: Vec<f64>,
    pub fraction_nonnegative: f64,
    pub regret_sum: f64,
    pub c_constant: f64,
    pub nu_star: f64,
    pub t_star: usize,
    /// `ζ_T` with `π_t = T`.
    pub zeta_horizon: f64,
    /// Information gain of the points actually chosen; a lower bound on the
    /// maximal information gain `γ_T`, used in its place.
    pub realized_information_gain: f64,
    /// `(ν_{t*} + ζ_T)·sqrt(C·T·I)`.
    pub rhs: f64,
    /// Rounds where `m̂_t < max f`, i.e. the bound's premise fails.
    pub m_hat_below_max: Vec<usize>,
    /// Rounds where `μ_{t−1}(x_t) − f(x_t) > ζ_t σ_{t−1}(x_t)`.
    pub deviation_events: Vec<usize>,
}

pub fn bound_report(result: &RunResult, model: &GpModel, delta: f64) -> Result<BoundReport> {
    let horizon = result.records.len();
    if horizon == 0 {
        return Err(Error::invalid("bound report needs at least one round"));
    }
    let mut nus = Vec::with_capacity(horizon);
    for r in &result.records {
        nus.push(r.nu_t.ok_or_else(|| {
            Error::invalid(format!("round {} has no nu_t; bound reports need an EST run", r.t))
        })?);
    }
    let mut margins = Vec::with_capacity(horizon);
    let mut m_hat_below_max = Vec::new();
    let mut deviation_events = Vec::new();
    for (r, &nu) in result.records.iter().zip(&nus) {
        let zeta = zeta_schedule(r.t, horizon, delta, ZetaSchedule::PiSquared)?;
        margins.push((nu + zeta) * r.sigma_at_choice - r.instant_regret);
        if r.m_hat.is_some_and(|m| m < result.f_max) {
            m_hat_below_max.push(r.t);
        }
        if r.mu_at_choice - r.f_value > zeta * r.sigma_at_choice {
            deviation_events.push(r.t);
        }
    }
    let (t_star_idx, nu_star) = nus
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let c_constant = bound_constant(model.noise_var);
    let zeta_horizon = zeta_schedule(horizon, horizon, delta, ZetaSchedule::Horizon)?;
    let gain = information_gain(model, &result.chosen_points())?;
    let regret_sum = result.records.last().map_or(0.0, |r| r.cumulative_regret);
    Ok(BoundReport {
        fraction_nonnegative: margins.iter().filter(|m| **m >= 0.0).count() as f64 / horizon as f64,
        margins,
        regret_sum,
        c_constant,
        nu_star,
        t_star: t_star_idx + 1,
        zeta_horizon,
        realized_information_gain: gain,
        rhs: (nu_star + zeta_horizon) * (c_constant * horizon as f64 * gain).sqrt(),
        m_hat_below_max,
        deviation_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelSpec, MeanSpec};

    fn model(noise: f64) -> GpModel {
        GpModel::new(KernelSpec::matern52(0.2, 1.0).unwrap(), MeanSpec::Zero, noise).unwrap()
    }

    #[test]
    fn zeta_reference_values() {
        let z = zeta_schedule(7, 150, 0.01, ZetaSchedule::Horizon).unwrap();
        assert!((z - 4.224_371_740_158_388).abs() < 1e-12);
        let z = zeta_schedule(1, 1, 0.5, ZetaSchedule::PiSquared).unwrap();
        assert!((z - 0.997_697_652_067_744_8).abs() < 1e-12);
        let mut prev = 0.0;
        for t in 1..50 {
            let z = zeta_schedule(t, 50, 0.1, ZetaSchedule::PiSquared).unwrap();
            assert!(z > prev);
            prev = z;
        }
        assert!(zeta_schedule(0, 5, 0.1, ZetaSchedule::PiSquared).is_err());
    }

    #[test]
    fn bound_constant_reference() {
        assert!((bound_constant(0.01) - 0.433_358_130_671_063_4).abs() < 1e-12);
    }

    #[test]
    fn information_gain_single_point() {
        let m = model(0.25);
        let g = information_gain(&m, &[vec![0.3]]).unwrap();
        assert!((g - 0.5 * (1.0f64 + 1.0 / 0.25).ln()).abs() < 1e-12);
        assert!(information_gain(&model(0.0), &[vec![0.3]]).is_err());
    }

    #[test]
    fn information_gain_is_submodular_on_duplicates() {
        let m = model(0.1);
        let one = information_gain(&m, &[vec![0.3]]).unwrap();
        let two = information_gain(&m, &[vec![0.3], vec![0.3]]).unwrap();
        assert!(two > one);
        assert!(two - one < one);
    }

    #[test]
    fn single_round_est_on_prior() {
        let grid = CandidateGrid::regular(&[(0.0, 1.0, 5)]).unwrap();
        let values = vec![0.0, 0.1, 0.2, 0.3, 0.4];
        let config = RunConfig::new(model(0.01), grid, AcquisitionKind::EstNumeric, 1);
        let result = run_with_values(&config, &values).unwrap();
        assert_eq!(result.records.len(), 1);
        // flat prior: every candidate ties, lowest index wins
        assert_eq!(result.records[0].index, 0);
        assert!(result.records[0].m_hat.unwrap() > 0.0);
    }

    #[test]
    fn objective_errors_carry_the_round() {
        let grid = CandidateGrid::regular(&[(0.0, 1.0, 5)]).unwrap();
        let config = RunConfig::new(model(0.01), grid, AcquisitionKind::ucb(), 3);
        let mut calls = 0;
        let err = run(&config, |x| {
            calls += 1;
            if calls > 6 {
                Err("boom".into())
            } else {
                Ok(x[0])
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Objective { round: 2, .. }), "{err}");
        let err = run(&config, |_| Err("down".into())).unwrap_err();
        assert!(matches!(err, Error::Objective { round: 0, .. }));
    }

    #[test]
    fn bound_report_requires_est() {
        let grid = CandidateGrid::regular(&[(0.0, 1.0, 5)]).unwrap();
        let values = vec![0.0, 0.1, 0.2, 0.3, 0.4];
        let config = RunConfig::new(model(0.01), grid, AcquisitionKind::ucb(), 2);
        let result = run_with_values(&config, &values).unwrap();
        assert!(bound_report(&result, &config.model, 0.01).is_err());
    }

    #[test]
    fn config_validation() {
        let grid = CandidateGrid::regular(&[(0.0, 1.0, 5)]).unwrap();
        let mut config = RunConfig::new(model(0.01), grid, AcquisitionKind::ucb(), 0);
        assert!(config.validate().is_err());
        config.max_rounds = 3;
        config.warm_start = vec![7];
        assert!(config.validate().is_err());
    }
}
