use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::readout::ReadoutWeights;
use crate::reservoir::Topology;
use crate::tasks::{
    autoencoder_on, inverter_on, video_filter_on, AutoencoderConfig, InverterConfig, ReservoirConfig, TaskKind,
    TaskReport, VideoConfig,
};
use crate::{Error, Result};

/// Everything a CLI invocation needs beyond its flags. Every field has a
/// default and unknown keys are rejected. Partial objects override the
/// task defaults key by key.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskKind,
    pub seed: u64,
    pub inverter: InverterConfig,
    pub video: VideoConfig,
    pub autoencoder: AutoencoderConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        let mut merged = serde_json::to_value(Self::default())?;
        merge(&mut merged, user);
        Ok(serde_json::from_value(merged)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Reservoir settings of the selected task.
    pub fn reservoir(&self) -> &ReservoirConfig {
        match self.task {
            TaskKind::Inverter => &self.inverter.reservoir,
            TaskKind::Video => &self.video.reservoir,
            TaskKind::Autoencoder => &self.autoencoder.reservoir,
        }
    }

    /// Runs the selected task on `topo`, fitting a readout unless one is given.
    pub fn run_on(
        &self,
        topo: &Topology,
        seed: u64,
        readout: Option<&ReadoutWeights>,
    ) -> Result<(TaskReport, ReadoutWeights)> {
        match self.task {
            TaskKind::Inverter => inverter_on(topo, &self.inverter, seed, readout),
            TaskKind::Video => video_filter_on(topo, &self.video, seed, readout),
            TaskKind::Autoencoder => autoencoder_on(topo, &self.autoencoder, seed, readout),
        }
    }

    /// Builds the selected task's reservoir from `seed` and runs it.
    pub fn run(&self, seed: u64) -> Result<TaskReport> {
        let topo = self.reservoir().build(seed)?;
        Ok(self.run_on(&topo, seed, None)?.0)
    }
}

/// Overlays `patch` onto `base`. Objects merge recursively unless their
/// `kind` tags differ, in which case the patch replaces the whole object.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) if !retagged(b, &p) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, patch) => *slot = patch,
    }
}

fn retagged(base: &Map<String, Value>, patch: &Map<String, Value>) -> bool {
    matches!((base.get("kind"), patch.get("kind")), (Some(a), Some(b)) if a != b)
}
