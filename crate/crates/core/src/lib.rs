//! Discrete-time echo-state reservoir simulator built from analog stochastic
//! neurons (ASN) joined by delay-line interconnects.
//!
//! The crate is organised bottom-up:
//!
//! * [`device`]: the ASN transfer model (sigmoid mean, input-dependent
//!   Gaussian noise) and the magnet energy-barrier helper.
//! * [`reservoir`]: random topologies with per-edge transport delays and
//!   the reservoir update rule.
//! * [`readout`]: linear readout, SVD pseudo-inverse and one-shot training.
//! * [`metrics`]: NRMSE, frame recovery rate, divergence horizon.
//! * [`tasks`]: signal inverter, glyph-video filter, temporal autoencoder.
//! * [`io`]: model files, run configuration, CSV traces, netlist export.

pub mod device;
pub mod error;
pub mod io;
pub mod metrics;
pub mod readout;
pub mod reservoir;
pub mod seed;
pub mod tasks;

pub use error::{Error, Result};
