//! Simulation toolkit for pre/post-selected interferometry.
//!
//! - [`qcore`]: dense states and operators over labeled path/polarization modes
//! - [`optics`]: idealized optical elements and routing-constraint completion
//! - [`weakval`]: exact weak values and the which-arm observables
//! - [`pointer`]: von Neumann pointer coupling, postselection, Monte Carlo readout
//! - [`scenario`]: the one- and two-photon setups and the `.qcc` text format
//! - [`cli`]: the `cheshire` command-line front end

pub mod cli;
pub mod error;
pub mod optics;
pub mod pointer;
pub mod qcore;
pub mod rng;
pub mod scenario;
pub mod weakval;

pub use error::{Error, Result};
