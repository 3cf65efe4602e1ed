//! Structural physical approximation (SPA) of the qubit transpose.
//!
//! The crate covers the full chain from the channel itself to a simulated
//! linear-optics experiment:
//!
//! - [`qmath`]: small dense complex linear algebra and random states,
//! - [`channels`]: Kraus / Choi / χ / measure-and-prepare representations and
//!   the SPA construction,
//! - [`optics`]: Jones calculus for waveplates and polarizers,
//! - [`shots`]: Poissonian coincidence counting with per-photon branch choice,
//! - [`tomography`]: maximum-likelihood state and process tomography,
//! - [`metrics`]: fidelities and partial-transpose diagnostics.

pub mod channels;
pub mod error;
pub mod metrics;
pub mod optics;
pub mod qmath;
pub mod shots;
pub mod tomography;

pub use error::{Error, Result};
