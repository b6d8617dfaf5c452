//! Generalized coupon-collector model of technology-aided discovery.
//!
//! An explorer knows a subset of a finite universe of elements. Each step a
//! noisy technology reports an element (a draw from the prior pushed through
//! an estimate channel) and the explorer adds it if it is new. This crate
//! provides the closed-form expected size and quality of the known set, a
//! seeded Monte Carlo simulator of the same process, and logistic /
//! saturating-exponential growth fits that tie the curves to empirical
//! discovery data.

pub mod analytic;
pub mod channels;
pub mod error;
pub mod fit;
pub mod model;
pub mod simulate;

pub use analytic::{
    asymptotic_rate, expected_fraction_uniform, expected_missing, expected_quality, expected_quality_alternating,
    expected_size, expected_size_alternating, quality_prevalence, ExpectationCurve,
};
pub use channels::{
    effective_pmf, explicit_channel, map_induced_channel, symmetric_channel, EstimateChannel, ObservationModel,
};
pub use error::{Error, Result};
pub use fit::{
    fit_growth, implied_model_parameters, log_linear_rate_estimate, GrowthFit, ImpliedParameters, ModelKind,
};
pub use model::{
    known_set_quality, make_binomial_prior, make_explicit_prior, make_uniform_prior, KnownSet, Pmf, QualityVector,
    Universe,
};
pub use simulate::{
    sample_categorical, simulate_ensemble, simulate_ensemble_with_workers, simulate_run, SimulationConfig, Trajectory,
    TrajectoryStats,
};
