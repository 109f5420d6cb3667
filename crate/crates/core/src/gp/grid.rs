use super::Point;
use crate::error::{check_dim, Error, Result};

/// The finite candidate set over which every acquisition is optimized.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    points: Vec<Point>,
    bounds: Vec<(f64, f64)>,
    rho: f64,
}

impl CandidateGrid {
    /// Tensor-product grid with `n` equally spaced points per dimension,
    /// endpoints included. The last dimension varies fastest. A dimension
    /// with `n = 1` is represented by its midpoint.
    pub fn regular(axes: &[(f64, f64, usize)]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("grid needs at least one dimension"));
        }
        let mut coords = Vec::with_capacity(axes.len());
        let mut half_spacing_sq = 0.0;
        for &(lo, hi, n) in axes {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("bad axis bounds [{lo}, {hi}]")));
            }
            if n == 0 {
                return Err(Error::invalid("axis needs at least one point"));
            }
            let axis: Vec<f64> = if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            };
            let half = if n == 1 { 0.5 * (hi - lo) } else { 0.5 * (hi - lo) / (n - 1) as f64 };
            half_spacing_sq += half * half;
            coords.push(axis);
        }
        let total: usize = coords.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; coords.len()];
        for _ in 0..total {
            points.push(idx.iter().zip(&coords).map(|(&i, c)| c[i]).collect());
            for d in (0..coords.len()).rev() {
                idx[d] += 1;
                if idx[d] < coords[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(Self {
            points,
            bounds: axes.iter().map(|&(lo, hi, _)| (lo, hi)).collect(),
            rho: half_spacing_sq.sqrt(),
        })
    }

    /// Irregular candidate set. Bounds are the bounding box of the points.
    /// When `rho` is not given the covering radius is estimated from a
    /// lattice of probe points in the box, which can only under-estimate it.
    pub fn from_points(points: Vec<Point>, rho: Option<f64>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::invalid("candidate set is empty"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::invalid("candidate points need at least one coordinate"));
        }
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for p in &points {
            check_dim(dim, p.len())?;
            for (b, &v) in bounds.iter_mut().zip(p) {
                if !v.is_finite() {
                    return Err(Error::invalid("candidate coordinates must be finite"));
                }
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        let rho = match rho {
            Some(r) if r >= 0.0 => r,
            Some(r) => return Err(Error::invalid(format!("covering radius must be nonnegative, got {r}"))),
            None => estimate_covering_radius(&points, &bounds),
        };
        Ok(Self { points, bounds, rho })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Covering radius ρ of the grid with respect to its bounding box.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn estimate_covering_radius(points: &[Point], bounds: &[(f64, f64)]) -> f64 {
    let dim = bounds.len();
    // Probe lattice with at most ~4096 points.
    let per_axis = ((4096f64).powf(1.0 / dim as f64).floor() as usize).max(2);
    let axes: Vec<(f64, f64, usize)> = bounds.iter().map(|&(lo, hi)| (lo, hi, per_axis)).collect();
    let probes = CandidateGrid::regular(&axes).expect("bounds are finite");
    probes
        .points
        .iter()
        .map(|q| {
            points
                .iter()
                .map(|p| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .fold(0.0, f64::max)
}
