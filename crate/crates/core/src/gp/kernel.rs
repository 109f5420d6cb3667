use crate::error::{check_dim, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// Matérn with smoothness ν = 3/2.
    Matern32,
    /// Matérn with smoothness ν = 5/2.
    #[default]
    Matern52,
    SquaredExponential,
}

/// Isotropic stationary covariance `k(x, x') = σ_f² · κ(‖x − x'‖ / ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default)]
    pub family: KernelFamily,
    pub lengthscale: f64,
    pub signal_std: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: f64, signal_std: f64) -> Result<Self> {
        let spec = Self { family, lengthscale, signal_std };
        spec.validate()?;
        Ok(spec)
    }

    pub fn matern52(lengthscale: f64, signal_std: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern52, lengthscale, signal_std)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::invalid(format!("lengthscale must be positive, got {}", self.lengthscale)));
        }
        if !(self.signal_std > 0.0 && self.signal_std.is_finite()) {
            return Err(Error::invalid(format!("signal_std must be positive, got {}", self.signal_std)));
        }
        Ok(())
    }

    /// Prior variance `k(x, x) = σ_f²`.
    pub fn variance(&self) -> f64 {
        self.signal_std * self.signal_std
    }

    /// Covariance as a function of the scaled distance `r = ‖x − x'‖ / ℓ`.
    pub fn of_scaled_distance(&self, r: f64) -> f64 {
        let shape = match self.family {
            KernelFamily::Matern32 => {
                let s = SQRT_3 * r;
                (1.0 + s) * (-s).exp()
            }
            KernelFamily::Matern52 => {
                let s = SQRT_5 * r;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelFamily::SquaredExponential => (-0.5 * r * r).exp(),
        };
        self.variance() * shape
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.of_scaled_distance(d2.sqrt() / self.lengthscale)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Gram matrix `K[i, j] = k(xs[i], xs[j])`.
    pub fn gram(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let n = xs.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.variance();
            for j in 0..i {
                let v = self.eval_unchecked(&xs[i], &xs[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Cross-covariance `K[i, j] = k(a[i], b[j])`.
    pub fn cross(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval_unchecked(&a[i], &b[j]))
    }
}

pub fn kernel_eval(kernel: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    kernel.eval(x, y)
}
