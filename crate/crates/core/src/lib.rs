pub mod cli;
pub mod config;
mod error;
pub mod measure;
pub mod orlicz;
pub mod probes;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod semigroup;
pub mod transitions;

pub use error::{Error, Result};
pub use measure::{GridFunction, MeasureKind, ModelMeasure1D, WeightedGrid};
pub use orlicz::NFunction;
pub use report::{Leg, LegStatus, VerificationReport};
