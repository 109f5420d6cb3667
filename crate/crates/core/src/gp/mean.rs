use serde::{Deserialize, Serialize};

/// Prior mean function.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeanSpec {
    #[default]
    Zero,
    /// `m(x) = slope · x + intercept`.
    Linear { slope: Vec<f64>, intercept: f64 },
}

impl MeanSpec {
    pub fn constant(c: f64, dim: usize) -> Self {
        MeanSpec::Linear { slope: vec![0.0; dim], intercept: c }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            MeanSpec::Zero => None,
            MeanSpec::Linear { slope, .. } => Some(slope.len()),
        }
    }

    /// Evaluate at `x`; callers are responsible for matching dimensions.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MeanSpec::Zero => 0.0,
            MeanSpec::Linear { slope, intercept } => {
                intercept + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            }
        }
    }
}
