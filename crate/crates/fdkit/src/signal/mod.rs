//! Fault profiles, correlated Gaussian noise and closed-form plant simulation
//! with output-additive faults.

mod fault;
mod noise;
mod sim;

pub use fault::{gen_fault, FaultKind, FaultSpec};
pub use noise::{gen_noise, NoiseRealization};
pub use sim::{simulate, SimulationRecord};
