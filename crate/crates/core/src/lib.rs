//! Qudit Bell-test laboratory.
//!
//! Computes the CGLMP quantity I both from classical hidden-variable
//! distributions and from quantum states under the three inequivalent
//! sequential measurement processes, and decides local-hidden-variable
//! membership of measurement statistics by linear-programming feasibility
//! and brute-force deterministic-strategy enumeration.
//!
//! The numeric core is generic over the real scalar type ([`Scalar`],
//! implemented for `f32` and `f64`); the aliases below fix `f64`, which is
//! what the CLI and the test suites use.

pub mod behavior_io;
pub mod cglmp;
pub mod error;
pub mod hvt;
pub mod quantum;
pub mod scalar;
pub mod sequences;
pub mod simplex;
pub mod states;

pub use error::{Error, Result};
pub use scalar::{Scalar, Tolerances};

// Concrete f64 aliases for the common single-precision-free usage.
pub type Operator64 = quantum::ComplexOperator<f64>;
pub type PureState64 = quantum::PureState<f64>;
pub type Pvm64 = quantum::Pvm<f64>;
pub type Density64 = quantum::DensityOperator<f64>;
pub type Scenario64 = sequences::MeasurementScenario<f64>;
pub type Behavior64 = hvt::BehaviorTable<f64>;
pub type HvtDistribution64 = hvt::HvtDistribution<f64>;
pub type LocalModel64 = hvt::LocalModel<f64>;
pub type Breakdown64 = cglmp::CglmpBreakdown<f64>;
pub type Tolerances64 = Tolerances<f64>;
