//! Channel efficiency and swapped-pair fidelity of entanglement swapping
//! between two ground stations through a Bell measurement on a satellite,
//! fed by two optical uplinks.
//!
//! The model chain runs geometry → beam and atmospheric losses → time-gated
//! wavepacket overlap → ground-photon and background click patterns →
//! success signatures → fidelity. [`scenario::evaluate_scenario`] runs it end
//! to end; [`sweep`] and [`optimize`] build grids and searches on top.

pub mod background;
pub mod channel;
pub mod coincidence;
pub mod config;
pub mod error;
pub mod geometry;
pub mod monte_carlo;
pub mod optimize;
pub mod output;
pub mod pattern;
pub mod quadrature;
pub mod scenario;
pub mod sweep;
pub mod wavepacket;

pub use error::{Error, Result};
pub use scenario::{evaluate_scenario, ProtocolMetrics, ScenarioParams};
