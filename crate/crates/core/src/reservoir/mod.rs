//! Reservoir construction and dynamics.
//!
//! Each step computes, per neuron `i`,
//!
//! ```text
//! x_i[t+1] = A( Σ_j w_self(i,j)·x_j[t − d_ij] + (W_in·u[t+1])_i + (W_fb·y[t])_i
//!               − decay·x_i[t] + noise_gain·v_i )
//! ```
//!
//! with `v_i` standard normal and `A` either `activation_gain·tanh` or the
//! rescaled ASN device response. Decay and noise sit inside the
//! nonlinearity.

mod params;
mod run;
mod state;
mod topology;

pub use params::{Backend, ReservoirParams};
pub use run::{echo_state_check, run, EchoStateReport, Harvest, RunMode, Runner};
pub use state::{step, ReservoirState};
pub use topology::{
    compute_delays, generate_topology, spectral_radius, Edge, Topology, TopologySpec, MAX_DRAWS,
};
