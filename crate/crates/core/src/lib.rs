//! Gaussian-process bandit optimization by estimating the location of the
//! maximum.
//!
//! The crate is organised bottom-up:
//!
//! * [`gp`]: kernels, mean functions, exact posterior inference and prior
//!   sampling over a finite [`gp::CandidateGrid`].
//! * [`max_value`]: estimators of the function maximum `m̂` under the
//!   independent-candidates approximation.
//! * [`acquisition`]: GP-UCB, GP-EI, GP-PI, EST and a random baseline, all
//!   reduced to an argmax/argmin over the grid.
//! * [`bandit`]: the sequential select/observe/update loop with regret
//!   accounting and regret-bound diagnostics.
//! * [`benchmarks`]: synthetic test functions and suite aggregation.
//!
//! ```
//! use gpest::acquisition::AcquisitionKind;
//! use gpest::bandit::{run_with_values, RunConfig};
//! use gpest::gp::{CandidateGrid, GpModel, KernelSpec};
//!
//! let grid = CandidateGrid::regular(&[(0.0, 1.0, 50)]).unwrap();
//! let values: Vec<f64> = grid.points().iter().map(|x| -(x[0] - 0.3).powi(2)).collect();
//! let model = GpModel::new(KernelSpec::matern52(0.2, 1.0).unwrap(), Default::default(), 1e-4).unwrap();
//! let config = RunConfig::new(model, grid, AcquisitionKind::EstNumeric, 20);
//! let result = run_with_values(&config, &values).unwrap();
//! assert!(result.r_min < 1e-2);
//! ```

pub mod acquisition;
pub mod bandit;
pub mod benchmarks;
mod error;
pub mod gp;
pub mod max_value;
pub mod normal;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
