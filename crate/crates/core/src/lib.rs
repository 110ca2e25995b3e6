//! Zero-one laws for local first-order sentences on binary random fields
//! over lattice tori.
//!
//! The crate is organised bottom-up: [`torus`] builds the graph, [`configuration`]
//! stores colorings, [`sentence`] parses and analyses the logic, [`samplers`]
//! draws random fields, [`evaluator`] decides and measures sentences, and
//! [`experiments`] drives the command-line experiments.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below fix the usual choice.

pub mod configuration;
pub mod error;
pub mod evaluator;
pub mod experiments;
pub mod samplers;
pub mod scalar;
pub mod sentence;
pub mod torus;

pub use configuration::{BallIndex, Configuration, LocalConfiguration};
pub use error::{Error, Result};
pub use scalar::Real;
pub use sentence::{parse_sentence, BasicLocalSentence, Formula, LocalFormula, Sentence};
pub use torus::{BallTemplate, Lattice, Norm, SubLattice, TorusGraph, TorusParams};

pub type IsingParamsF64 = samplers::IsingParams<f64>;
pub type IsingDistributionF64 = samplers::IsingDistribution<f64>;
pub type FieldModelF64 = samplers::FieldModel<f64>;
pub type ShiftFieldParamsF64 = samplers::ShiftFieldParams<f64>;
pub type PotentialScheduleF64 = samplers::PotentialSchedule<f64>;
pub type ProbabilityEstimateF64 = evaluator::ProbabilityEstimate<f64>;
pub type LocalFrequenciesF64 = evaluator::LocalFrequencies<f64>;
pub type MixingReportF64 = evaluator::MixingReport<f64>;
