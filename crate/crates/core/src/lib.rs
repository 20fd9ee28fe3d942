//! Stochastic neuromorphic circuits for approximate MAXCUT.
//!
//! Two circuits are simulated on top of a pool of coin-flip devices feeding a
//! population of leaky integrate-and-fire (LIF) integrators:
//!
//! * **LIF-GW** samples Goemans-Williamson hyperplane roundings. Device-to-neuron
//!   weights are the rows of a low-rank SDP solution, so membrane covariances are
//!   proportional to the Gram matrix of those rows and the sign of each membrane
//!   is a rounded vertex label.
//! * **LIF-Trevisan** wires the devices through the Trevisan matrix
//!   `I + D^-1/2 A D^-1/2` and learns its minimum eigenvector online with Oja's
//!   anti-Hebbian rule. The cut is the sign pattern of the learned weights.
//!
//! The [`oracles`] module provides independent ground truth (exhaustive search,
//! Jacobi eigendecomposition, Gaussian hyperplane rounding) and [`bench`] drives
//! Erdős–Rényi and file-based experiments producing CSV output.

pub mod bench;
pub mod circuits;
pub mod cli;
pub mod dense;
pub mod devices;
pub mod error;
pub mod graph;
pub mod lif;
pub mod oracles;
pub mod plasticity;
pub mod rng;
pub mod sdp;

pub use error::{Error, Result};
pub use graph::{CutAssignment, Graph};
