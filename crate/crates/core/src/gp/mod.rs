//! Gaussian-process machinery: kernels, mean functions, exact posterior
//! inference, prior sampling and marginal likelihood.

mod grid;
mod kernel;
mod likelihood;
mod mean;
mod posterior;
mod sample;

pub use grid::CandidateGrid;
pub use kernel::{kernel_eval, KernelFamily, KernelSpec};
pub use likelihood::{log_marginal_likelihood, refit_kernel, RefitSpec};
pub use mean::MeanSpec;
pub use posterior::{fit_posterior, Posterior, Prediction, JITTER_MAX, JITTER_START, VAR_FLOOR};
pub use sample::{sample_function, PriorSampler};

use crate::error::{check_dim, Error, Result};
use serde::{Deserialize, Serialize};

/// A point in the input space.
pub type Point = Vec<f64>;

/// Prior over the objective: `f ~ GP(mean, kernel)` observed through
/// additive Gaussian noise of variance `noise_var`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub mean: MeanSpec,
    pub noise_var: f64,
}

impl GpModel {
    pub fn new(kernel: KernelSpec, mean: MeanSpec, noise_var: f64) -> Result<Self> {
        let model = Self { kernel, mean, noise_var };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::invalid(format!(
                "noise variance must be finite and nonnegative, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    /// Input dimension implied by the mean function, if it fixes one.
    pub fn mean_dim(&self) -> Option<usize> {
        self.mean.dim()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self.mean_dim() {
            Some(d) => check_dim(d, dim),
            None => Ok(()),
        }
    }
}

/// Observations `{(x_τ, y_τ)}` gathered so far.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    points: Vec<Point>,
    values: Vec<f64>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        check_dim(points.len(), values.len())?;
        let mut history = Self::new();
        for (x, y) in points.into_iter().zip(values) {
            history.push(x, y)?;
        }
        Ok(history)
    }

    pub fn push(&mut self, x: Point, y: f64) -> Result<()> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observations must be finite"));
        }
        self.points.push(x);
        self.values.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest observed value, `m₀`.
    pub fn best_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    /// The first `n` observations.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            points: self.points[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }
}
