//! Classical and quantum simulators for the two-switch stochastic process.
//!
//! The crate models a simple perturbed-coin process, its minimal classical
//! (causal-state) model, and a quantum model that stores the causal states
//! as non-orthogonal qubit states. It provides:
//!
//! - [`qmath`]: one- and two-qubit linear algebra and entropies
//! - [`process`]: the switch system, causal machine, block laws, excess entropy
//! - [`qmodel`]: quantum causal states, steady-state memory, controlled-Û synthesis
//! - [`circuit`]: statevector step circuits with measurement, repreparation and noise
//! - [`tomo`]: simulated single-qubit tomography with bootstrap error bars
//! - [`cli`]: the experiment runner behind the `qstoch` binary

pub mod circuit;
pub mod cli;
pub mod error;
pub mod process;
pub mod qmath;
pub mod qmodel;
pub mod rng;
pub mod stats;
pub mod tomo;

pub use error::{Error, Result};
pub use process::{CausalMachine, SwitchConfig, Trace};
pub use qmath::{DensityMatrix, Ket, Unitary};
pub use qmodel::QuantumModel;

