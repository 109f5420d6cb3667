use super::{CandidateGrid, GpModel, History, Point};
use crate::error::{check_dim, Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Floor applied to predictive variances before taking square roots.
pub const VAR_FLOOR: f64 = 1e-12;
/// First jitter tried, relative to the signal variance.
pub const JITTER_START: f64 = 1e-12;
/// Largest jitter tried before giving up, relative to the signal variance.
pub const JITTER_MAX: f64 = 1e-4;

/// Posterior means and standard deviations over a set of candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Prediction {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        check_dim(means.len(), stds.len())?;
        if means.is_empty() {
            return Err(Error::invalid("prediction needs at least one candidate"));
        }
        if stds.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::invalid("standard deviations must be positive and finite"));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("means must be finite"));
        }
        Ok(Self { means, stds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn max_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// GP posterior conditioned on a [`History`]. Immutable once fitted.
#[derive(Debug, Clone)]
pub struct Posterior {
    model: GpModel,
    history: History,
    factor: Option<Factor>,
}

#[derive(Debug, Clone)]
struct Factor {
    /// Lower Cholesky factor of `K + (σ² + jitter)·I`.
    chol: Cholesky<f64, Dyn>,
    /// `(K + σ²I)⁻¹ (y − m(X))`.
    weights: DVector<f64>,
    jitter: f64,
}

/// Factorize `K + (noise + jitter)·I`, escalating the jitter by ×10 from
/// `JITTER_START·σ_f²` to `JITTER_MAX·σ_f²`.
pub(crate) fn factorize(k: &DMatrix<f64>, noise: f64, signal_var: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = JITTER_START * signal_var;
    loop {
        let mut a = k.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += noise + jitter;
        }
        if let Some(chol) = Cholesky::new(a) {
            return Ok((chol, jitter));
        }
        if jitter >= JITTER_MAX * signal_var * (1.0 - 1e-9) {
            let diag = k.diagonal();
            let (min_diag, max_diag) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            return Err(Error::Factorization {
                size: k.nrows(),
                jitter,
                min_diag,
                max_diag,
                ratio: max_diag / (noise + jitter),
            });
        }
        jitter *= 10.0;
    }
}

pub fn fit_posterior(model: &GpModel, history: &History) -> Result<Posterior> {
    model.validate()?;
    if let Some(d) = history.dim() {
        model.check_dim(d)?;
    }
    if history.is_empty() {
        return Ok(Posterior { model: model.clone(), history: history.clone(), factor: None });
    }
    let k = model.kernel.gram(history.points());
    let (chol, jitter) = factorize(&k, model.noise_var, model.kernel.variance())?;
    let residuals = DVector::from_iterator(
        history.len(),
        history.points().iter().zip(history.values()).map(|(x, y)| y - model.mean.eval(x)),
    );
    let weights = chol.solve(&residuals);
    Ok(Posterior {
        model: model.clone(),
        history: history.clone(),
        factor: Some(Factor { chol, weights, jitter }),
    })
}

impl Posterior {
    pub fn model(&self) -> &GpModel {
        &self.model
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Jitter added to the diagonal, zero for an empty history.
    pub fn jitter(&self) -> f64 {
        self.factor.as_ref().map_or(0.0, |f| f.jitter)
    }

    fn check_points(&self, xs: &[Point]) -> Result<()> {
        let dim = self.history.dim().or(self.model.mean_dim());
        if let Some(d) = dim {
            for x in xs {
                check_dim(d, x.len())?;
            }
        }
        Ok(())
    }

    /// `L⁻¹ K(X, xs)`, the whitened cross-covariance.
    fn whitened_cross(&self, factor: &Factor, xs: &[Point]) -> DMatrix<f64> {
        let mut v = self.model.kernel.cross(self.history.points(), xs);
        factor.chol.l_dirty().solve_lower_triangular_mut(&mut v);
        v
    }

    fn means(&self, xs: &[Point], cross: Option<&DMatrix<f64>>) -> Vec<f64> {
        let prior = xs.iter().map(|x| self.model.mean.eval(x));
        match (&self.factor, cross) {
            (Some(f), Some(kx)) => {
                let adj = kx.tr_mul(&f.weights);
                prior.zip(adj.iter()).map(|(m, a)| m + a).collect()
            }
            _ => prior.collect(),
        }
    }

    /// Posterior means and variances without any flooring.
    pub fn mean_and_variance(&self, xs: &[Point]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_points(xs)?;
        let prior_var = self.model.kernel.variance();
        let Some(factor) = &self.factor else {
            return Ok((self.means(xs, None), vec![prior_var; xs.len()]));
        };
        let kx = self.model.kernel.cross(self.history.points(), xs);
        let means = self.means(xs, Some(&kx));
        let mut v = kx;
        factor.chol.l_dirty().solve_lower_triangular_mut(&mut v);
        let vars = v.column_iter().map(|c| prior_var - c.norm_squared()).collect();
        Ok((means, vars))
    }

    /// Means and standard deviations at arbitrary points; variances are
    /// floored at [`VAR_FLOOR`].
    pub fn predict_points(&self, xs: &[Point]) -> Result<Prediction> {
        let (means, vars) = self.mean_and_variance(xs)?;
        let stds = vars.into_iter().map(|v| v.max(VAR_FLOOR).sqrt()).collect();
        Ok(Prediction { means, stds })
    }

    pub fn predict(&self, grid: &CandidateGrid) -> Result<Prediction> {
        if let Some(d) = self.history.dim() {
            check_dim(d, grid.dim())?;
        }
        self.model.check_dim(grid.dim())?;
        self.predict_points(grid.points())
    }

    /// Full posterior covariance `k_t(x, x')` over `xs`.
    pub fn posterior_cov(&self, xs: &[Point]) -> Result<DMatrix<f64>> {
        self.check_points(xs)?;
        let prior = self.model.kernel.gram(xs);
        match &self.factor {
            None => Ok(prior),
            Some(f) => {
                let v = self.whitened_cross(f, xs);
                Ok(prior - v.tr_mul(&v))
            }
        }
    }

    /// `ln det(K + (σ² + jitter)·I)` and the quadratic form
    /// `rᵀ (K + σ²I)⁻¹ r` of the mean-adjusted observations.
    pub(crate) fn evidence_terms(&self) -> Option<(f64, f64)> {
        let f = self.factor.as_ref()?;
        let log_det = 2.0 * f.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let quad = self
            .history
            .points()
            .iter()
            .zip(self.history.values())
            .zip(f.weights.iter())
            .map(|((x, y), w)| (y - self.model.mean.eval(x)) * w)
            .sum();
        Some((log_det, quad))
    }
}
