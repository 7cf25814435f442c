//! Simulation of the MAUS (moment angular system) code: a qubit stored in
//! the extremal `I_y` eigenstates of a large nuclear spin, protected against
//! dephasing with the donor electron as a measurement ancilla.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codes;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod optimal_recovery;
pub mod protocol;
pub mod spin;

pub use channel::QuantumChannel;
pub use error::{Error, Result};
pub use spin::{HalfInteger, Operator};

/// Crate version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
