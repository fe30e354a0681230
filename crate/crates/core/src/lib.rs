//! Degradation-aware day-ahead scheduling.
//!
//! A synthetic battery-aging oracle produces training data for a small ReLU
//! network, which is pruned neuron by neuron and compiled exactly into the
//! unit-commitment MILP so the solver prices battery wear directly.

pub mod bench;
pub mod error;
pub mod fixtures;
pub mod milp;
pub mod net;
pub mod oracle;
pub mod sched;
pub mod solve;

pub use error::{Error, Result};
