use super::{fit_posterior, GpModel, History, KernelSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Log evidence `ln p(y | X, model)`.
pub fn log_marginal_likelihood(model: &GpModel, history: &History) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::invalid("log marginal likelihood needs at least one observation"));
    }
    let post = fit_posterior(model, history)?;
    let (log_det, quad) = post.evidence_terms().expect("history is nonempty");
    Ok(-0.5 * quad - 0.5 * log_det - 0.5 * history.len() as f64 * (2.0 * PI).ln())
}

/// Exhaustive lengthscale × signal-std grid for periodic kernel refits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefitSpec {
    /// Refit whenever the history length is a positive multiple of `every`.
    pub every: usize,
    pub lengthscales: Vec<f64>,
    pub signal_stds: Vec<f64>,
}

impl RefitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.every == 0 {
            return Err(Error::invalid("refit interval must be positive"));
        }
        if self.lengthscales.is_empty() || self.signal_stds.is_empty() {
            return Err(Error::invalid("refit grid must be nonempty"));
        }
        Ok(())
    }

    /// Model to use once `history` is known: the kernel is refit on the
    /// longest prefix whose length is a multiple of `every`. Depends only on
    /// the history, so a stateless caller recovers the same model.
    pub fn model_for(&self, base: &GpModel, history: &History) -> Result<GpModel> {
        let n = (history.len() / self.every) * self.every;
        if n == 0 {
            return Ok(base.clone());
        }
        refit_kernel(base, &history.prefix(n), self)
    }
}

/// Kernel hyperparameters on `spec`'s grid maximizing the log marginal
/// likelihood; ties resolve to the first grid entry (lengthscales outer).
pub fn refit_kernel(base: &GpModel, history: &History, spec: &RefitSpec) -> Result<GpModel> {
    spec.validate()?;
    let mut best: Option<(f64, GpModel)> = None;
    for &ell in &spec.lengthscales {
        for &sf in &spec.signal_stds {
            let candidate = GpModel {
                kernel: KernelSpec::new(base.kernel.family, ell, sf)?,
                ..base.clone()
            };
            let lml = match log_marginal_likelihood(&candidate, history) {
                Ok(v) => v,
                Err(Error::Factorization { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|(b, _)| lml > *b) {
                best = Some((lml, candidate));
            }
        }
    }
    best.map(|(_, m)| m)
        .ok_or_else(|| Error::invalid("no refit candidate could be factorized"))
}
