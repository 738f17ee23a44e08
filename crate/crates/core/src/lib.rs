//! Load-frequency control of an islanded small hydropower plant.
//!
//! The crate simulates the plant with its dump-load secondary controller,
//! regulates frequency with a PD, an adaptive incremental PID or a fuzzy PD
//! controller, tunes the fuzzy membership functions with a genetic algorithm
//! (optionally screened by a random-hidden-layer surrogate), and scores runs
//! with the usual transient metrics.
//!
//! Modules:
//! - [`plant`]: turbine, governor, swing dynamics, dump-load ladder, PLL.
//! - [`fuzzy`]: gene decoding, membership families, rule base, inference.
//! - [`control`]: the regulators behind one [`control::Controller`] trait.
//! - [`optim`]: chromosomes, GA, surrogate network, efficiency.
//! - [`metrics`]: overshoot, settling time, IAE/ISE/ITAE, comparison tables.
//! - [`harness`]: scenario files, closed-loop runs, artifacts.

pub mod control;
pub mod error;
pub mod fuzzy;
pub mod harness;
pub mod metrics;
pub mod optim;
pub mod plant;

pub use error::{LfcError, Result};
