//! Trace-driven model of a client processor's power-delivery network and
//! power-management firmware.
//!
//! The crate quantifies the trade-off of bypassing per-core power gates
//! at the package level: a bypassed network has lower impedance and a
//! smaller voltage guardband (raising the attainable frequency of
//! Fmax-constrained parts), at the cost of idle-core leakage that a
//! deeper package idle state compensates.
//!
//! Modules follow the stack bottom-up: [`pdn`] solves the electrical
//! network, [`guardband`] turns impedance into voltage margins,
//! [`vfmodel`] maps voltage headroom to frequency, [`power`] models
//! dissipation and design limits, [`cstates`] handles package idle
//! states, [`pmu`] implements the firmware decisions, and [`sim`] drives
//! everything from activity traces.

pub mod config;
pub mod cstates;
pub mod error;
pub mod guardband;
pub mod pdn;
pub mod pmu;
pub mod power;
pub mod report;
pub mod sim;
pub mod vfmodel;

pub use error::{Error, Result};
