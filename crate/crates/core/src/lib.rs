//! Fault-tolerant construction of concatenated cluster states.
//!
//! The crate covers a Pauli/stabilizer simulator, the seven-qubit code, the
//! verified cluster gadgets built from it, Monte Carlo estimators over those
//! gadgets, closed-form error and threshold models, and the resource
//! recurrence for preparing them level by level.

pub mod analytic;
pub mod blueprint;
pub mod circuit;
pub mod compiled;
pub mod error;
pub mod exec;
pub mod gadgets;
pub mod montecarlo;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod report;
pub mod resources;
pub mod scalar;
pub mod steane;
pub mod tableau;

pub use error::{Error, Result};
pub use num_rational::BigRational;
pub use scalar::Scalar;

pub type NoiseModel64 = noise::NoiseModel<f64>;
pub type NoiseModel32 = noise::NoiseModel<f32>;
pub type ExactNoiseModel = noise::NoiseModel<BigRational>;

pub type HomogeneousErrors64 = analytic::HomogeneousErrors<f64>;
pub type ExactHomogeneousErrors = analytic::HomogeneousErrors<BigRational>;

pub type ThresholdParams64 = analytic::ThresholdParams<f64>;
pub type ExactThresholdParams = analytic::ThresholdParams<BigRational>;

pub type SuccessTable64 = resources::SuccessTable<f64>;
pub type ExactSuccessTable = resources::SuccessTable<BigRational>;

pub type ResourceVector64 = resources::ResourceVector<f64>;
pub type ExactResourceVector = resources::ResourceVector<BigRational>;
