//! End-to-end experiments: signal inverter, glyph-video filter and temporal
//! autoencoder.
//!
//! Every task derives its random streams from a single master seed:
//! `"topology"` for the weights, `"reservoir"` for the neuron noise, and a
//! task-specific name for the data.

mod autoencoder;
mod glyph;
mod inverter;
mod report;
mod signals;
mod video;

use serde::{Deserialize, Serialize};

use crate::readout::DEFAULT_RIDGE;
use crate::reservoir::{generate_topology, ReservoirParams, Topology, TopologySpec};
use crate::seed::derive_seed;
use crate::Result;

pub use autoencoder::{autoencoder_on, corrective_injection, task_autoencoder, AutoencoderConfig, Injection};
pub use glyph::Glyph;
pub use inverter::{inverter_on, task_inverter, InverterConfig};
pub use report::{TaskKind, TaskReport, Trace};
pub use signals::{gen_signal, SignalKind, SignalSpec, MACKEY_GLASS_HISTORY, MACKEY_GLASS_TRANSIENT};
pub use video::{
    distort_frame, generate_video, task_video_filter, video_filter_on, DistortionParams, GlyphVideo, GlyphVideoSpec,
    VideoConfig,
};

/// Reservoir construction, dynamics and training settings shared by tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirConfig {
    pub topology: TopologySpec,
    pub dynamics: ReservoirParams,
    pub ridge: f64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            topology: TopologySpec::default(),
            dynamics: ReservoirParams::default(),
            ridge: DEFAULT_RIDGE,
        }
    }
}

impl ReservoirConfig {
    pub fn build(&self, seed: u64) -> Result<Topology> {
        self.dynamics.validate()?;
        generate_topology(&self.topology, derive_seed(seed, "topology"))
    }

    pub fn noise_seed(seed: u64) -> u64 {
        derive_seed(seed, "reservoir")
    }
}

/// Median of a non-empty sample (mean of the middle pair for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
