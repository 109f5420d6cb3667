//! Test objectives and suite aggregation: functions drawn from a GP prior,
//! Hartmann-3 and Branin, plus the per-acquisition `T_min`/`r_min` table.

use crate::acquisition::AcquisitionKind;
use crate::bandit::{run_with_values, RunConfig, RunResult};
use crate::error::{Error, Result};
use crate::gp::{sample_function, CandidateGrid, GpModel, KernelSpec, MeanSpec, RefitSpec};
use crate::max_value::LipschitzSpec;
use crate::rng;
use crate::stats::{lower_median, mean, std_dev};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const OBJECTIVE_SALT: u64 = 0x6f62_6a65;
const SLOPE_STREAM: u64 = 3;
const WARM_STREAM: u64 = 4;
const RUN_SALT: u64 = 0x7275_6e73;

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 3]; 4] = [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];
const HARTMANN_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

pub const BRANIN_BOUNDS: [(f64, f64); 2] = [(-5.0, 10.0), (0.0, 15.0)];

/// Hartmann-3 on `[0, 1]³`, negated so that larger is better.
pub fn hartmann3(x: &[f64]) -> Result<f64> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: x.len() });
    }
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("hartmann3 input {v} outside [0, 1]")));
    }
    Ok(HARTMANN_ALPHA
        .iter()
        .zip(HARTMANN_A.iter().zip(&HARTMANN_P))
        .map(|(alpha, (a, p))| {
            let s: f64 = (0..3).map(|j| a[j] * (x[j] - p[j]).powi(2)).sum();
            alpha * (-s).exp()
        })
        .sum())
}

/// Branin-Hoo on `[−5, 10] × [0, 15]`, negated so that larger is better.
pub fn branin(x: &[f64]) -> Result<f64> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
    }
    for (v, (lo, hi)) in x.iter().zip(BRANIN_BOUNDS) {
        if !(lo..=hi).contains(v) {
            return Err(Error::invalid(format!("branin input {v} outside [{lo}, {hi}]")));
        }
    }
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    Ok(-((x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0))
}

fn branin_unit(u: &[f64]) -> Result<f64> {
    let x: Vec<f64> = u.iter().zip(BRANIN_BOUNDS).map(|(v, (lo, hi))| lo + (hi - lo) * v).collect();
    branin(&x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionFamily {
    #[serde(rename = "gp_sample_1d")]
    GpSample1D,
    #[serde(rename = "gp_sample_2d")]
    GpSample2D,
    Hartmann3,
    Branin,
}

impl FunctionFamily {
    pub fn dim(self) -> usize {
        match self {
            FunctionFamily::GpSample1D => 1,
            FunctionFamily::GpSample2D | FunctionFamily::Branin => 2,
            FunctionFamily::Hartmann3 => 3,
        }
    }

    pub fn default_resolution(self) -> usize {
        match self {
            FunctionFamily::GpSample1D => 300,
            FunctionFamily::GpSample2D | FunctionFamily::Branin => 50,
            FunctionFamily::Hartmann3 => 20,
        }
    }
}

/// One benchmark instance on its candidate grid. The grid always lives in
/// the unit cube; fixed test functions are rescaled onto their native box.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub grid: CandidateGrid,
    pub values: Vec<f64>,
    pub f_max: f64,
    /// The prior the values were drawn from, or the default prior used to
    /// optimize a fixed test function.
    pub model: GpModel,
}

/// Prior over the sampled test functions: Matérn-5/2 with `ℓ = 0.1`,
/// `σ_f = 1` and a linear mean with intercept 1 and slopes drawn from
/// `U[−1, 1]` per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpObjectiveSpec {
    pub lengthscale: f64,
    pub signal_std: f64,
    pub noise_var: f64,
    pub resolution: usize,
}

impl GpObjectiveSpec {
    pub fn new(dim: usize) -> Self {
        Self {
            lengthscale: 0.1,
            signal_std: 1.0,
            noise_var: 1e-4,
            resolution: if dim == 1 { 300 } else { 50 },
        }
    }
}

/// Draw a test function on the regular unit grid. Deterministic in `seed`.
pub fn make_gp_objective(dim: usize, seed: u64, spec: &GpObjectiveSpec) -> Result<Objective> {
    if !(1..=3).contains(&dim) {
        return Err(Error::invalid(format!("sampled objectives support 1 to 3 dimensions, got {dim}")));
    }
    let grid = CandidateGrid::regular(&vec![(0.0, 1.0, spec.resolution); dim])?;
    let mut slope_rng = rng::stream(seed, SLOPE_STREAM);
    let slope = (0..dim).map(|_| slope_rng.random_range(-1.0..=1.0)).collect();
    let model = GpModel::new(
        KernelSpec::matern52(spec.lengthscale, spec.signal_std)?,
        MeanSpec::Linear { slope, intercept: 1.0 },
        spec.noise_var,
    )?;
    let values = sample_function(&model, &grid, seed)?;
    Ok(objective(grid, values, model))
}

fn objective(grid: CandidateGrid, values: Vec<f64>, model: GpModel) -> Objective {
    let f_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Objective { grid, values, f_max, model }
}

fn fixed_objective(f: fn(&[f64]) -> Result<f64>, dim: usize, resolution: usize, model: GpModel) -> Result<Objective> {
    let grid = CandidateGrid::regular(&vec![(0.0, 1.0, resolution); dim])?;
    let values = grid.points().iter().map(|x| f(x)).collect::<Result<Vec<_>>>()?;
    Ok(objective(grid, values, model))
}

fn default_spec() -> usize {
    1
}

fn default_rounds() -> usize {
    150
}

fn default_acquisitions() -> Vec<AcquisitionKind> {
    vec![AcquisitionKind::EstNumeric, AcquisitionKind::ucb(), AcquisitionKind::pi()]
}

fn default_noise() -> f64 {
    0.01
}

fn default_delta() -> f64 {
    0.01
}

/// A benchmark protocol. Every field except `family` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub family: FunctionFamily,
    #[serde(default = "default_spec")]
    pub n_functions: usize,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_acquisitions")]
    pub acquisitions: Vec<AcquisitionKind>,
    /// Grid points per dimension; family default when absent.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub base_seed: u64,
    /// Std of the Gaussian noise on each observation.
    #[serde(default = "default_noise")]
    pub observation_noise_std: f64,
    /// Model noise variance; defaults to the observation noise variance.
    #[serde(default)]
    pub noise_var: Option<f64>,
    #[serde(default)]
    pub lengthscale: Option<f64>,
    #[serde(default)]
    pub signal_std: Option<f64>,
    /// Random grid points shared by all acquisitions before round 1.
    #[serde(default)]
    pub warm_start: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub refit: Option<RefitSpec>,
    /// Lipschitz constant for the ESTn covering correction.
    #[serde(default)]
    pub lipschitz_constant: Option<f64>,
}

impl SuiteSpec {
    pub fn new(family: FunctionFamily, n_functions: usize, max_rounds: usize, acquisitions: Vec<AcquisitionKind>) -> Self {
        Self {
            family,
            n_functions,
            max_rounds,
            acquisitions,
            resolution: None,
            base_seed: 0,
            observation_noise_std: default_noise(),
            noise_var: None,
            lengthscale: None,
            signal_std: None,
            warm_start: 0,
            delta: default_delta(),
            refit: None,
            lipschitz_constant: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_functions == 0 {
            return Err(Error::invalid("n_functions must be at least 1"));
        }
        if self.max_rounds == 0 {
            return Err(Error::invalid("max_rounds must be at least 1"));
        }
        if self.acquisitions.is_empty() {
            return Err(Error::invalid("at least one acquisition is required"));
        }
        for a in &self.acquisitions {
            a.validate()?;
        }
        if self.resolution == Some(0) {
            return Err(Error::invalid("resolution must be at least 1"));
        }
        if !(self.observation_noise_std >= 0.0 && self.observation_noise_std.is_finite()) {
            return Err(Error::invalid("observation_noise_std must be nonnegative"));
        }
        if let Some(n) = self.noise_var {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::invalid("noise_var must be nonnegative"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        if let Some(r) = &self.refit {
            r.validate()?;
        }
        if let Some(l) = self.lipschitz_constant {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::invalid("lipschitz_constant must be nonnegative"));
            }
        }
        if self.warm_start >= self.resolution().pow(self.family.dim() as u32) {
            return Err(Error::invalid("warm_start must be smaller than the grid"));
        }
        Ok(())
    }

    pub fn resolution(&self) -> usize {
        self.resolution.unwrap_or_else(|| self.family.default_resolution())
    }

    fn noise_var(&self) -> f64 {
        self.noise_var.unwrap_or(self.observation_noise_std * self.observation_noise_std)
    }

    /// The `i`-th objective of the suite; identical for every acquisition.
    pub fn objective(&self, function_id: usize) -> Result<Objective> {
        let seed = rng::mix(rng::mix(self.base_seed, OBJECTIVE_SALT), function_id as u64);
        let lengthscale = self.lengthscale.unwrap_or(0.1);
        let signal_std = self.signal_std.unwrap_or(1.0);
        let dim = self.family.dim();
        match self.family {
            FunctionFamily::GpSample1D | FunctionFamily::GpSample2D => {
                let spec = GpObjectiveSpec {
                    lengthscale,
                    signal_std,
                    noise_var: self.noise_var(),
                    resolution: self.resolution(),
                };
                make_gp_objective(dim, seed, &spec)
            }
            FunctionFamily::Hartmann3 | FunctionFamily::Branin => {
                let model = GpModel::new(KernelSpec::matern52(lengthscale, signal_std)?, MeanSpec::Zero, self.noise_var())?;
                let f = if self.family == FunctionFamily::Branin { branin_unit } else { hartmann3 };
                fixed_objective(f, dim, self.resolution(), model)
            }
        }
    }

    /// Warm-start grid indices for function `i`, shared by all acquisitions.
    pub fn warm_start_indices(&self, function_id: usize, grid_size: usize) -> Vec<usize> {
        if self.warm_start == 0 {
            return Vec::new();
        }
        let mut r = rng::stream(rng::mix(self.base_seed, function_id as u64), WARM_STREAM);
        sample(&mut r, grid_size, self.warm_start).into_vec()
    }

    /// Run seed for function `i`; drives the observation noise.
    pub fn run_seed(&self, function_id: usize) -> u64 {
        rng::mix(rng::mix(self.base_seed, RUN_SALT), function_id as u64)
    }

    pub fn run_config(&self, objective: &Objective, acquisition: &AcquisitionKind, function_id: usize) -> Result<RunConfig> {
        let mut config = RunConfig::new(objective.model.clone(), objective.grid.clone(), acquisition.clone(), self.max_rounds);
        config.observation_noise_std = self.observation_noise_std;
        config.seed = self.run_seed(function_id);
        config.refit = self.refit.clone();
        config.delta = self.delta;
        config.warm_start = self.warm_start_indices(function_id, objective.grid.len());
        if let Some(l) = self.lipschitz_constant {
            config.lipschitz = Some(LipschitzSpec::new(l, objective.grid.rho())?);
        }
        Ok(config)
    }

    /// Distinct display labels, one per acquisition entry.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::with_capacity(self.acquisitions.len());
        for a in &self.acquisitions {
            let base = a.label();
            let seen = labels.iter().filter(|l| l.as_str() == base || l.starts_with(&format!("{base}#"))).count();
            labels.push(if seen == 0 { base.to_string() } else { format!("{base}#{}", seen + 1) });
        }
        labels
    }
}

/// The pieces of one run that enter the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub r_min: f64,
    pub t_min: usize,
    pub simple_regret: Vec<f64>,
    pub cumulative_regret: Vec<f64>,
}

impl From<&RunResult> for Trace {
    fn from(r: &RunResult) -> Self {
        Self {
            r_min: r.r_min,
            t_min: r.t_min,
            simple_regret: r.simple_regret(),
            cumulative_regret: r.cumulative_regret(),
        }
    }
}

/// Per-round mean and sample standard deviation over the runs that reached
/// that round.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Curve {
    fn from_series<'a>(series: impl Iterator<Item = &'a [f64]> + Clone) -> Self {
        let len = series.clone().map(<[f64]>::len).max().unwrap_or(0);
        let (mut m, mut s) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for t in 0..len {
            let column: Vec<f64> = series.clone().filter_map(|r| r.get(t).copied()).collect();
            m.push(mean(&column));
            s.push(std_dev(&column));
        }
        Self { mean: m, std: s }
    }
}

/// One row of the summary table. Medians use the lower median.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionStats {
    pub label: String,
    pub n_runs: usize,
    pub t_min_mean: f64,
    pub t_min_median: f64,
    pub r_min_mean: f64,
    pub r_min_median: f64,
    pub simple_regret: Curve,
    pub cumulative_regret: Curve,
}

impl AcquisitionStats {
    pub fn from_traces(label: impl Into<String>, traces: &[Trace]) -> Self {
        let t_min: Vec<f64> = traces.iter().map(|t| t.t_min as f64).collect();
        let r_min: Vec<f64> = traces.iter().map(|t| t.r_min).collect();
        Self {
            label: label.into(),
            n_runs: traces.len(),
            t_min_mean: mean(&t_min),
            t_min_median: lower_median(&t_min),
            r_min_mean: mean(&r_min),
            r_min_median: lower_median(&r_min),
            simple_regret: Curve::from_series(traces.iter().map(|t| t.simple_regret.as_slice())),
            cumulative_regret: Curve::from_series(traces.iter().map(|t| t.cumulative_regret.as_slice())),
        }
    }

    /// `R_T` at the last round: mean cumulative regret divided by `T`.
    pub fn final_average_regret(&self) -> f64 {
        self.cumulative_regret.mean.last().map_or(f64::NAN, |c| c / self.cumulative_regret.mean.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub label: String,
    pub function_id: usize,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteFailure {
    pub label: String,
    pub function_id: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    /// Ordered by acquisition, then function index.
    pub runs: Vec<SuiteRun>,
    pub stats: Vec<AcquisitionStats>,
    pub failures: Vec<SuiteFailure>,
    /// Ground-truth maximum of each objective.
    pub f_max: Vec<f64>,
}

/// Run every acquisition on every objective. Failed runs are reported in
/// `failures` and left out of the statistics; an objective that cannot be
/// built fails the whole suite.
pub fn run_suite(spec: &SuiteSpec) -> Result<SuiteOutcome> {
    spec.validate()?;
    let objectives = par_map(0..spec.n_functions, |i| spec.objective(i)).into_iter().collect::<Result<Vec<_>>>()?;
    let labels = spec.labels();
    let jobs: Vec<(usize, usize)> =
        (0..spec.acquisitions.len()).flat_map(|a| (0..spec.n_functions).map(move |i| (a, i))).collect();
    let results = par_map(jobs.iter().copied(), |(a, i)| {
        let objective = &objectives[i];
        let config = spec.run_config(objective, &spec.acquisitions[a], i)?;
        run_with_values(&config, &objective.values)
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for ((a, i), result) in jobs.into_iter().zip(results) {
        match result {
            Ok(mut result) => {
                result.label = labels[a].clone();
                runs.push(SuiteRun { label: labels[a].clone(), function_id: i, result });
            }
            Err(e) => failures.push(SuiteFailure { label: labels[a].clone(), function_id: i, message: e.to_string() }),
        }
    }
    let stats = labels
        .iter()
        .map(|label| {
            let traces: Vec<Trace> = runs.iter().filter(|r| &r.label == label).map(|r| Trace::from(&r.result)).collect();
            AcquisitionStats::from_traces(label.clone(), &traces)
        })
        .collect();
    Ok(SuiteOutcome { runs, stats, failures, f_max: objectives.iter().map(|o| o.f_max).collect() })
}

#[cfg(feature = "parallel")]
fn par_map<I, T, F>(items: I, f: F) -> Vec<T>
where
    I: Iterator + Send,
    I::Item: Send,
    T: Send,
    F: Fn(I::Item) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.collect::<Vec<_>>().into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<I, T, F>(items: I, f: F) -> Vec<T>
where
    I: Iterator,
    F: Fn(I::Item) -> T,
{
    items.map(f).collect()
}
