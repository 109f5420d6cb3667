use super::posterior::factorize;
use super::{CandidateGrid, GpModel};
use crate::error::Result;
use crate::rng;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

/// Draws joint prior samples over a fixed grid, reusing one factorization of
/// the grid's Gram matrix.
#[derive(Debug, Clone)]
pub struct PriorSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl PriorSampler {
    pub fn new(model: &GpModel, grid: &CandidateGrid) -> Result<Self> {
        model.validate()?;
        model.check_dim(grid.dim())?;
        let k = model.kernel.gram(grid.points());
        let (chol, _) = factorize(&k, 0.0, model.kernel.variance())?;
        let mean = DVector::from_iterator(grid.len(), grid.points().iter().map(|x| model.mean.eval(x)));
        Ok(Self { mean, factor: chol.unpack() })
    }

    /// One draw `f ~ N(mean, K)`; deterministic in `seed`.
    pub fn draw(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng::stream(seed, 0);
        let z = DVector::from_iterator(self.mean.len(), (0..self.mean.len()).map(|_| StandardNormal.sample(&mut rng)));
        let f = &self.mean + &self.factor * z;
        f.iter().copied().collect()
    }
}

/// One joint draw of the prior over `grid`.
pub fn sample_function(model: &GpModel, grid: &CandidateGrid, seed: u64) -> Result<Vec<f64>> {
    Ok(PriorSampler::new(model, grid)?.draw(seed))
}
