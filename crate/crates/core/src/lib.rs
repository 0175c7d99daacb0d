//! Simulation and temperature measurement for two-state agent systems.
//!
//! A population of N agents each holds a state s in {-1, +1} (conform /
//! non-conform to a news environment of strength B). The population mean of s
//! is the decision surplus M, and the toolkit converts M into the state
//! variable T (the system's "temperature") via the mean-field measurement
//! equation, with exact brute-force references for small systems.
//!
//! The numeric core is generic over the scalar type through [`Real`];
//! `f64` aliases for the common types live at the crate root.

// Validation deliberately writes `!(x > 0)` instead of `x <= 0`: the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod equilibrium;
pub mod error;
pub mod estimator;
pub mod meanfield;
pub mod oracle;
mod real;
pub mod simulator;

pub use error::{Error, Result};
pub use real::Real;

pub use domain::Topology;

/// `f64` aliases for the generic core types.
pub type SystemParams = domain::SystemParams<f64>;
pub type SurplusEstimate = domain::SurplusEstimate<f64>;
pub type TemperatureReading = domain::TemperatureReading<f64>;
pub type CountRecord = domain::CountRecord<f64>;
pub type Surplus = meanfield::Surplus<f64>;
pub type OccupationProbabilities = meanfield::OccupationProbabilities<f64>;
pub type CurvePoint = meanfield::CurvePoint<f64>;
pub type SimulationConfig = simulator::SimulationConfig<f64>;
pub type ExactEnsemble = oracle::ExactEnsemble<f64>;
pub type CoupledSurplus = equilibrium::CoupledSurplus<f64>;

/// `f32` aliases, for callers that trade precision for footprint.
pub type SystemParams32 = domain::SystemParams<f32>;
pub type SurplusEstimate32 = domain::SurplusEstimate<f32>;
pub type TemperatureReading32 = domain::TemperatureReading<f32>;
