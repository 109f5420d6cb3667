//! JSON configuration files. Every field has a default except the grid of a
//! suggest config and the family of a bench config; unknown keys are
//! rejected.

use crate::error::{CliError, Result};
use gpest::acquisition::AcquisitionKind;
use gpest::bandit::RunConfig;
use gpest::benchmarks::SuiteSpec;
use gpest::gp::{CandidateGrid, GpModel, KernelSpec, MeanSpec, RefitSpec};
use gpest::max_value::LipschitzSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SEED_ENV: &str = "GPEST_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Either a regular grid (`dims`) or an explicit list of candidate points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<Axis>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    /// Covering radius for an explicit point list; estimated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<CandidateGrid> {
        let grid = match (&self.dims, &self.points) {
            (Some(dims), None) => {
                if self.rho.is_some() {
                    return Err(CliError::usage("grid.rho only applies to explicit points"));
                }
                CandidateGrid::regular(&dims.iter().map(|a| (a.lo, a.hi, a.n)).collect::<Vec<_>>())
            }
            (None, Some(points)) => CandidateGrid::from_points(points.clone(), self.rho),
            _ => return Err(CliError::usage("grid needs exactly one of `dims` or `points`")),
        };
        grid.map_err(|e| CliError::usage(format!("grid: {e}")))
    }
}

fn default_kernel() -> KernelSpec {
    KernelSpec::matern52(0.1, 1.0).expect("valid default kernel")
}

fn default_noise_var() -> f64 {
    1e-4
}

fn default_acquisition() -> AcquisitionKind {
    AcquisitionKind::EstNumeric
}

fn default_delta() -> f64 {
    0.01
}

/// Configuration of `suggest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestConfig {
    pub grid: GridConfig,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub mean: MeanSpec,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    #[serde(default = "default_acquisition")]
    pub acquisition: AcquisitionKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub refit: Option<RefitSpec>,
    #[serde(default)]
    pub lipschitz_constant: Option<f64>,
}

impl SuggestConfig {
    /// The loop configuration whose round `t` equals one `suggest` call
    /// with `t − 1` history rows. The horizon is irrelevant to selection.
    pub fn run_config(&self, max_rounds: usize) -> Result<RunConfig> {
        let grid = self.grid.build()?;
        let model = GpModel::new(self.kernel, self.mean.clone(), self.noise_var).map_err(CliError::usage)?;
        let mut config = RunConfig::new(model, grid, self.acquisition.clone(), max_rounds.max(1));
        config.seed = self.seed;
        config.delta = self.delta;
        config.refit = self.refit.clone();
        if let Some(l) = self.lipschitz_constant {
            config.lipschitz = Some(LipschitzSpec::new(l, config.grid.rho()).map_err(CliError::usage)?);
        }
        config.validate().map_err(CliError::usage)?;
        Ok(config)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Seed override from the environment, if set.
pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("{SEED_ENV} must be a nonnegative integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::usage(format!("{SEED_ENV}: {e}"))),
    }
}

pub fn load_suite(path: &Path) -> Result<SuiteSpec> {
    let mut spec: SuiteSpec = read_json(path)?;
    if let Some(seed) = seed_override()? {
        spec.base_seed = seed;
    }
    spec.validate().map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

pub fn load_suggest(path: &Path) -> Result<SuggestConfig> {
    let mut config: SuggestConfig = read_json(path)?;
    if let Some(seed) = seed_override()? {
        config.seed = seed;
    }
    Ok(config)
}
