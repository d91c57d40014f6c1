use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::readout::{ReadoutWeights, TrainingInfo};
use crate::reservoir::{Backend, ReservoirParams, Topology};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// A reservoir with its dynamics and, once trained, its readout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub device: DeviceParams,
    pub params: ReservoirParams,
    pub topology: Topology,
    pub readout: Option<ReadoutWeights>,
}

impl ModelFile {
    pub fn new(params: ReservoirParams, topology: Topology) -> Self {
        let device = match params.backend {
            Backend::Asn { device, .. } => device,
            Backend::Ideal => DeviceParams::default(),
        };
        Self {
            device,
            params,
            topology,
            readout: None,
        }
    }

    pub fn with_readout(mut self, readout: ReadoutWeights) -> Result<Self> {
        check_readout(&self.topology, &readout)?;
        self.readout = Some(readout);
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.raw())?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Malformed("missing integer format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::Version {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: FORMAT_VERSION,
            });
        }
        let raw: RawModel = serde_json::from_value(value)?;
        raw.into_model()
    }

    fn raw(&self) -> RawModel {
        let t = &self.topology;
        RawModel {
            format_version: FORMAT_VERSION,
            device: self.device,
            reservoir: RawReservoir {
                params: self.params.clone(),
                topology: RawTopology {
                    n: t.n(),
                    inputs: t.inputs(),
                    outputs: t.outputs(),
                    d_max: t.d_max(),
                    seed: t.seed(),
                    w_in: rows(t.w_in()),
                    w_self: rows(t.w_self()),
                    w_fb: rows(t.w_fb()),
                    delays: rows(t.delays()),
                },
            },
            readout: self.readout.as_ref().map(|r| RawReadout {
                w_out: rows(r.matrix()),
                trained_on: r.trained_on.clone(),
            }),
        }
    }
}

pub fn save_model(model: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::ModelNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    ModelFile::from_json(&text)
}

fn check_readout(topo: &Topology, r: &ReadoutWeights) -> Result<()> {
    if r.inputs() != topo.n() {
        return Err(Error::dim("readout columns", topo.n(), r.inputs()));
    }
    if r.outputs() != topo.outputs() {
        return Err(Error::dim("readout rows", topo.outputs(), r.outputs()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    format_version: u32,
    device: DeviceParams,
    reservoir: RawReservoir,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    readout: Option<RawReadout>,
}

#[derive(Serialize, Deserialize)]
struct RawReservoir {
    params: ReservoirParams,
    topology: RawTopology,
}

#[derive(Serialize, Deserialize)]
struct RawTopology {
    n: usize,
    inputs: usize,
    outputs: usize,
    d_max: u32,
    seed: u64,
    w_in: Vec<Vec<f64>>,
    w_self: Vec<Vec<f64>>,
    w_fb: Vec<Vec<f64>>,
    delays: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct RawReadout {
    w_out: Vec<Vec<f64>>,
    trained_on: TrainingInfo,
}

impl RawModel {
    fn into_model(self) -> Result<ModelFile> {
        self.device.validate()?;
        let params = self.reservoir.params;
        params.validate()?;
        if let Backend::Asn { device, .. } = params.backend {
            if device != self.device {
                return Err(Error::Malformed("backend device differs from model device".into()));
            }
        }
        let t = self.reservoir.topology;
        let topology = Topology::from_parts(
            matrix("w_in", &t.w_in, t.n, t.inputs)?,
            matrix("w_self", &t.w_self, t.n, t.n)?,
            matrix("w_fb", &t.w_fb, t.n, t.outputs)?,
            matrix("delays", &t.delays, t.n, t.n)?,
            t.d_max,
            t.seed,
        )?;
        let readout = match self.readout {
            Some(r) => {
                let w = ReadoutWeights::new(matrix("w_out", &r.w_out, t.outputs, t.n)?, r.trained_on)?;
                check_readout(&topology, &w)?;
                Some(w)
            }
            None => None,
        };
        Ok(ModelFile {
            device: self.device,
            params,
            topology,
            readout,
        })
    }
}

fn rows<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix<T: nalgebra::Scalar + Copy>(
    name: &'static str,
    rows: &[Vec<T>],
    nrows: usize,
    ncols: usize,
) -> Result<DMatrix<T>> {
    if rows.len() != nrows {
        return Err(Error::dim(name, format!("{nrows} rows"), format!("{} rows", rows.len())));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::dim(name, format!("{ncols} columns"), format!("{} columns", r.len())));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{generate_topology, TopologySpec};

    fn model() -> ModelFile {
        let topo = generate_topology(&TopologySpec::default(), 11).unwrap();
        ModelFile::new(ReservoirParams::default(), topo)
    }

    #[test]
    fn json_round_trip_is_stable() {
        let m = model();
        let text = m.to_json().unwrap();
        let back = ModelFile::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn readout_survives_round_trip() {
        let m = model();
        let w = DMatrix::from_fn(1, 25, |_, j| (j as f64).sin() / 3.0);
        let info = TrainingInfo { samples: 10, ridge: 1e-8, seed: Some(3) };
        let m = m.with_readout(ReadoutWeights::new(w, info).unwrap()).unwrap();
        let back = ModelFile::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn wrong_version_rejected() {
        let text = model().to_json().unwrap().replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(ModelFile::from_json(&text), Err(Error::Version { found: 2, supported: 1 })));
    }

    #[test]
    fn mismatched_readout_rejected() {
        let w = ReadoutWeights::new(DMatrix::zeros(1, 24), TrainingInfo { samples: 1, ridge: 0.0, seed: None }).unwrap();
        assert!(model().with_readout(w).is_err());
    }
}
