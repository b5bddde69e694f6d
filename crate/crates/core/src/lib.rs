//! Saturation model and simulator of 802.11 DCF with in-band full duplex
//! and uplink frame aggregation.
//!
//! [`hd`] and [`ibfd`] hold the analytical models, [`sim`] an independent
//! event-level simulator, and [`experiment`] the grids that compare them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod config;
pub mod error;
pub mod experiment;
pub mod hd;
pub mod ibfd;
pub mod params;
pub mod sim;
pub mod solver;

pub use aggregation::{AggregationMode, RhoSpec, TrafficProfile};
pub use error::{Error, Result};
pub use params::{BackoffParams, Nanos, PhyMacParams};
pub use solver::SolverOptions;
