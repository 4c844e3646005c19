//! Simulation of a qubit under an eternally non-Markovian lossy channel, with
//! two copies combined by coherent control (superposed causal orders or
//! superposed paths), and detection of information backflow through the
//! trace distance of a probe pair.
//!
//! The crate is organised bottom-up:
//!
//! * [`qmat`]: dense complex matrices, density operators, trace distance.
//! * [`channel`]: Kraus channels, CPTP checks, the `φ_t` family and an RK4
//!   integrator for its master equation.
//! * [`control`]: switch and path supermaps, post-selection and the closed
//!   forms of the controlled output states.
//! * [`backflow`]: distance derivatives, backflow detection, thresholds and
//!   `(a, p)` region scans.
//! * [`cli`]: the `qbackflow` command line.

pub mod backflow;
pub mod channel;
pub mod cli;
pub mod control;
pub mod error;
pub mod qmat;

pub use error::{Error, Result};
