//! Cavity-QED high-harmonic generation: a grid model of a 1D atom coupled to one
//! cavity mode, a polariton-basis propagator, and spectrum analysis.

// `!(x > 0.0)` style checks reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod electronic;
pub mod error;
pub mod grid;
pub mod hhg;
pub mod io;
pub mod polariton;
pub mod pulse;
pub mod record;
pub mod run;
pub mod sweep;
pub mod tdci;
pub mod units;

pub use cavity::CavitySpec;
pub use electronic::ElectronicData;
pub use error::{Error, Result};
pub use polariton::PolaritonBasis;
pub use pulse::PulseSpec;
pub use record::{PopulationRecord, TrajectoryRecord};
