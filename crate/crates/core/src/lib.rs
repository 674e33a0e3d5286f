//! Computable objects for i.i.d. lattice random walks: exact laws of
//! partial sums, the Bernoulli-part decomposition, Chernoff tail bounds
//! for the Bernoulli count, local-limit error curves, the exact
//! covariance of centered hit indicators against its bound shapes, and
//! Monte Carlo runs of the log-averaged almost-sure hit statistic.
//!
//! Everything is generic over a [`Real`] scalar; the `f64`
//! instantiations below are the intended defaults.

pub mod asllt;
pub mod bernoulli;
pub mod binomial;
pub mod chernoff;
pub mod conv;
pub mod correlation;
pub mod error;
pub mod lattice;
pub mod llt;
pub mod num;

pub use error::{Error, Result};
pub use num::Real;

pub use asllt::{expected_average, run_ensemble, run_path, AslltRun, EnsembleSummary};
pub use bernoulli::{sample_decomposition, BernoulliPart, DecompositionSample, TauSequence};
pub use chernoff::{psi, solve_theta, verify_chernoff, ChernoffParams};
pub use conv::{convolve_n, convolve_n_direct, joint_prob, ConvolveOptions, SumDistribution};
pub use correlation::{
    bound_scan, decade_grid, exact_cov, full_grid, BoundScan, ConvCache, CorrelationRecord,
    KappaSequence, OffLatticeSequence, TargetSequence,
};
pub use lattice::{DistStats, LatticePmf};
pub use llt::{bernoulli_llt_error, gauss_local, llt_error, LltErrorCurve, RateFit};

/// Double-precision instantiations, the intended defaults.
pub type Pmf = LatticePmf<f64>;
pub type Stats = DistStats<f64>;
pub type SumDist = SumDistribution<f64>;
pub type Tau = TauSequence<f64>;
pub type BPart = BernoulliPart<f64>;
pub type Kappa = KappaSequence<f64>;
pub type Cache = ConvCache<f64>;
