//! Charging dynamics of two- and three-level quantum batteries driven by
//! Gaussian microwave pulses.
//!
//! The crate covers the transmon level spectrum, pulse envelopes, the
//! charging Hamiltonians in several frames, closed-form solutions for the
//! resonant, sequential, simultaneous and average-frequency protocols, a
//! fixed-step integrator for everything else, charging observables, and a
//! simulated dispersive readout.

pub mod analytic;
pub mod device;
pub mod error;
pub mod hamiltonian;
pub mod integrator;
pub mod observables;
pub mod pulses;
pub mod readout;
pub mod state;

pub use device::{LevelSpectrum, TransmonParams};
pub use error::{Error, Result};
pub use hamiltonian::{DriveTerm, Normalization, ProtocolKind, ProtocolSpec, PulseShape, Transition};
pub use integrator::{evolve, Trajectory};
pub use observables::{EnergyCurve, SweepResult};
pub use pulses::{DiscretizedPulse, Envelope, PulseEnvelope};
pub use state::{Frame, StateVector};
