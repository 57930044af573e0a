//! Estimation, fiducial inference and risk analysis for the scaled uniform
//! model `Y_i = θ·U_i` with `U_i` uniform on `[1-k, 1+k]` and `k` known.
//!
//! * [`model`]: designs, samples, sufficient statistics, likelihood.
//! * [`pareto`]: truncated Pareto laws with real index of either sign.
//! * [`estimators`]: every point estimator as a function of the sufficient statistic.
//! * [`fiducial`]: the fiducial distribution, intervals, loss-optimal decisions.
//! * [`risklab`]: Monte Carlo and quadrature risk, coverage, audits.
//! * [`cli`]: the `scaled-uniform` command line front end.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod fiducial;
pub mod model;
pub mod parallel;
pub mod pareto;
pub mod quad;
pub mod risklab;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::{catalog, Estimator};
pub use fiducial::{fiducial_dist, FiducialDist, LossKind};
pub use model::{Design, Sample, SuffStat};
pub use pareto::TruncPareto;
