use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{gen_signal, ReservoirConfig, SignalKind, SignalSpec, TaskKind, TaskReport, Trace};
use crate::metrics::{nrmse, sign_agreement, MetricReport};
use crate::readout::{train_readout, ReadoutWeights};
use crate::reservoir::{run, RunMode, Topology, TopologySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverterConfig {
    pub reservoir: ReservoirConfig,
    pub signal: SignalKind,
    pub amplitude: f64,
    /// Target is `target_gain · input`; −1 inverts.
    pub target_gain: f64,
    pub train_len: usize,
    pub test_len: usize,
    /// Neurons whose activations are emitted in the trace.
    pub trace_neurons: Vec<usize>,
}

impl Default for InverterConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig {
                topology: TopologySpec {
                    n: 25,
                    inputs: 1,
                    outputs: 1,
                    ..Default::default()
                },
                ..Default::default()
            },
            signal: SignalKind::Square { period: 20 },
            amplitude: 1.0,
            target_gain: -1.0,
            train_len: 1000,
            test_len: 500,
            trace_neurons: vec![3, 9, 11],
        }
    }
}

/// Trains the readout to reproduce `target_gain · u[t]` with the feedback
/// path disconnected, then scores it on the held-out continuation.
pub fn task_inverter(cfg: &InverterConfig, seed: u64) -> Result<TaskReport> {
    let topo = cfg.reservoir.build(seed)?;
    Ok(inverter_on(&topo, cfg, seed, None)?.0)
}

/// Inverter pipeline on a given topology. A supplied readout is scored as
/// is; otherwise one is fitted on the training span.
pub fn inverter_on(
    topo: &Topology,
    cfg: &InverterConfig,
    seed: u64,
    readout: Option<&ReadoutWeights>,
) -> Result<(TaskReport, ReadoutWeights)> {
    if topo.inputs() != 1 || topo.outputs() != 1 {
        return Err(Error::dim("inverter reservoir (inputs, outputs)", "(1, 1)", format!("({}, {})", topo.inputs(), topo.outputs())));
    }
    if cfg.train_len < 2 || cfg.test_len < 2 {
        return Err(Error::InvalidParam("train_len and test_len must be >= 2".into()));
    }
    let rp = &cfg.reservoir.dynamics;
    let washout = rp.washout;
    let total = washout + cfg.train_len + cfg.test_len;
    let input = gen_signal(&SignalSpec::new(cfg.signal, cfg.amplitude, total))?;
    let target: Vec<f64> = input.iter().map(|u| cfg.target_gain * u).collect();

    let u = DMatrix::from_row_slice(1, total, &input);
    let harvest = run(topo, rp, &u, RunMode::NoFeedback, ReservoirConfig::noise_seed(seed))?;
    let states = &harvest.states;

    let w = match readout {
        Some(w) => w.clone(),
        None => {
            let train_x = states.columns(0, cfg.train_len).into_owned();
            let train_y = DMatrix::from_row_slice(1, cfg.train_len, &target[washout..washout + cfg.train_len]);
            let mut w = train_readout(&train_x, &train_y, cfg.reservoir.ridge)?;
            w.trained_on.seed = Some(seed);
            w
        }
    };

    let predicted = w.apply_matrix(states)?;
    let predicted: Vec<f64> = predicted.row(0).iter().copied().collect();
    let (fit, held_out) = predicted.split_at(cfg.train_len);
    let test_target = &target[washout + cfg.train_len..];

    let metrics = MetricReport {
        nrmse: nrmse(test_target, held_out)?,
        sign_agreement: Some(sign_agreement(test_target, held_out)?),
        recovery_rate: None,
        divergence_horizon: None,
    };
    let mut report = TaskReport::new(TaskKind::Inverter, seed, metrics);
    report.extra.insert("train_nrmse".into(), nrmse(&target[washout..washout + cfg.train_len], fit)?);
    report.extra.insert("spectral_radius".into(), topo.spectral_radius());

    let t: Vec<f64> = (washout..total).map(|k| k as f64).collect();
    let mut trace = Trace::new("inverter")
        .with("t", t)
        .with("input", input[washout..].to_vec())
        .with("target", target[washout..].to_vec())
        .with("output", predicted.clone());
    for &i in &cfg.trace_neurons {
        if i < topo.n() {
            trace = trace.with(format!("neuron_{i}"), states.row(i).iter().copied().collect());
        }
    }
    report.traces.push(trace);
    Ok((report, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_inverter_inverts() {
        let r = task_inverter(&InverterConfig::default(), 1).unwrap();
        assert!(r.metrics.sign_agreement.unwrap() >= 0.9, "{r:?}");
        assert!(r.metrics.nrmse <= 0.3, "{r:?}");
    }

    #[test]
    fn noiseless_sine_is_easy() {
        let mut cfg = InverterConfig {
            signal: SignalKind::Sine { frequency: 0.05 },
            ..Default::default()
        };
        cfg.reservoir.dynamics.noise_gain = 0.0;
        let r = task_inverter(&cfg, 2).unwrap();
        assert!(r.metrics.nrmse <= 0.05, "{}", r.metrics.nrmse);
    }

    #[test]
    fn identity_is_no_harder_than_inversion() {
        let inv = task_inverter(&InverterConfig::default(), 3).unwrap();
        let ident = task_inverter(&InverterConfig { target_gain: 1.0, ..Default::default() }, 3).unwrap();
        assert!(ident.metrics.nrmse <= inv.metrics.nrmse + 1e-9);
    }

    #[test]
    fn same_seed_same_report() {
        let a = task_inverter(&InverterConfig::default(), 4).unwrap();
        let b = task_inverter(&InverterConfig::default(), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_has_requested_neurons() {
        let r = task_inverter(&InverterConfig::default(), 5).unwrap();
        let labels = &r.traces[0].labels;
        assert_eq!(labels, &["t", "input", "target", "output", "neuron_3", "neuron_9", "neuron_11"]);
        assert!(r.traces[0].columns.iter().all(|c| c.len() == 1500));
    }

    #[test]
    fn wrong_dimensions_rejected() {
        let mut cfg = InverterConfig::default();
        cfg.reservoir.topology.inputs = 2;
        assert!(task_inverter(&cfg, 1).is_err());
    }
}
