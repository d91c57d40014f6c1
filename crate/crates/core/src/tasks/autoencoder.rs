//! Generative (closed-loop) reproduction of a scalar signal.
//!
//! Teaching drives the feedback path with the true signal while the readout
//! is fitted; afterwards the reservoir runs on its own output.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{gen_signal, ReservoirConfig, SignalKind, SignalSpec, TaskKind, TaskReport, Trace};
use crate::metrics::{divergence_horizon, nrmse, MetricReport};
use crate::readout::{train_readout, ReadoutWeights};
use crate::reservoir::{RunMode, Runner, Topology, TopologySpec};
use crate::seed::component_rng;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoencoderConfig {
    pub reservoir: ReservoirConfig,
    pub signal: SignalKind,
    pub amplitude: f64,
    pub teach_len: usize,
    pub free_len: usize,
    /// Free-run prefix scored by the headline NRMSE.
    pub eval_len: usize,
    /// Length of the windows in the windowed NRMSE.
    pub window: usize,
    pub divergence_epsilon: f64,
    pub divergence_hold: usize,
    /// Steps of true signal re-injected after divergence.
    pub injection_len: usize,
    /// Std of Gaussian noise added to the fed-back teacher (not to the
    /// regression target) during teaching.
    pub teacher_noise: f64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig {
                topology: TopologySpec {
                    n: 100,
                    inputs: 1,
                    outputs: 1,
                    ..Default::default()
                },
                ..Default::default()
            },
            signal: SignalKind::double_sinusoid_default(),
            amplitude: 1.0,
            teach_len: 2000,
            free_len: 600,
            eval_len: 300,
            window: 100,
            divergence_epsilon: 0.25,
            divergence_hold: 10,
            injection_len: 20,
            teacher_noise: 0.0,
        }
    }
}

impl AutoencoderConfig {
    fn validate(&self) -> Result<()> {
        if self.teach_len <= self.reservoir.dynamics.washout + 1 {
            return Err(Error::InvalidParam("teach_len must exceed the washout".into()));
        }
        if self.eval_len < 2 || self.eval_len > self.free_len {
            return Err(Error::InvalidParam("eval_len must lie in [2, free_len]".into()));
        }
        if self.window < 2 {
            return Err(Error::InvalidParam("window must be >= 2".into()));
        }
        Ok(())
    }
}

/// Outcome of re-synchronising a diverged free run with the true signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    /// Free-run step at which injection started.
    pub at: usize,
    /// Window error of the uncorrected free run after the injection period.
    pub before: f64,
    /// Window error of the corrected run over the same window.
    pub after: f64,
}

/// Error normalised by target variance, or by the target level when the
/// target is constant.
fn series_error(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    match nrmse(y_true, y_pred) {
        Ok(v) => Ok(v),
        Err(Error::InvalidParam(_)) if y_true.len() >= 2 && y_true.len() == y_pred.len() => {
            let len = y_true.len() as f64;
            let rmse = (y_true.iter().zip(y_pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / len).sqrt();
            let level = (y_true.iter().sum::<f64>() / len).abs();
            Ok(if level > 0.0 { rmse / level } else { rmse })
        }
        Err(e) => Err(e),
    }
}

/// From the post-teaching runner: free-runs `at` steps, forces the true
/// signal for `len` steps, then free-runs `window` steps and scores them.
/// `reference[k]` is the true signal at free-run step `k`.
pub fn corrective_injection(
    taught: &Runner<'_>,
    readout: &ReadoutWeights,
    reference: &[f64],
    at: usize,
    len: usize,
    window: usize,
) -> Result<Injection> {
    let end = at + len + window;
    if reference.len() < end {
        return Err(Error::dim("injection reference length", end, reference.len()));
    }
    let target = &reference[at + len..end];

    let mut base = taught.clone();
    let uncorrected = base.free_run(end, readout)?;
    let before: Vec<f64> = uncorrected.outputs.row(0).iter().skip(at + len).copied().collect();

    let mut fixed = taught.clone();
    fixed.free_run(at, readout)?;
    let forcing = DMatrix::from_row_slice(1, len, &reference[at..at + len]);
    let zeros = DMatrix::zeros(fixed.input_dim(), len);
    fixed.drive(&zeros, RunMode::OpenLoop { teacher: &forcing }, 0)?;
    let after = fixed.free_run(window, readout)?;
    let after: Vec<f64> = after.outputs.row(0).iter().copied().collect();

    Ok(Injection {
        at,
        before: series_error(target, &before)?,
        after: series_error(target, &after)?,
    })
}

pub fn task_autoencoder(cfg: &AutoencoderConfig, seed: u64) -> Result<TaskReport> {
    cfg.validate()?;
    let topo = cfg.reservoir.build(seed)?;
    Ok(autoencoder_on(&topo, cfg, seed, None)?.0)
}

/// Autoencoder pipeline on a given topology. Teaching always runs; a
/// supplied readout replaces the fitted one for the free run.
pub fn autoencoder_on(
    topo: &Topology,
    cfg: &AutoencoderConfig,
    seed: u64,
    readout: Option<&ReadoutWeights>,
) -> Result<(TaskReport, ReadoutWeights)> {
    cfg.validate()?;
    if topo.outputs() != 1 {
        return Err(Error::dim("autoencoder output dimension", 1, topo.outputs()));
    }
    if topo.w_fb().iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidParam("autoencoder needs a nonzero feedback path".into()));
    }
    let rp = &cfg.reservoir.dynamics;
    let (teach, free) = (cfg.teach_len, cfg.free_len);
    let horizon_len = teach + free + cfg.injection_len + cfg.window;
    let signal = gen_signal(&SignalSpec::new(cfg.signal, cfg.amplitude, horizon_len))?;

    // Teaching: zero external input, true signal on the feedback path.
    let mut runner = Runner::new(topo, rp, ReservoirConfig::noise_seed(seed))?;
    let teacher = DMatrix::from_row_slice(1, teach, &signal[..teach]);
    let mut jitter = component_rng(seed, "teacher-noise");
    let forced = teacher.map(|v| {
        let e: f64 = jitter.sample(StandardNormal);
        v + cfg.teacher_noise * e
    });
    let zeros = DMatrix::zeros(topo.inputs(), teach);
    let harvest = runner.drive(&zeros, RunMode::OpenLoop { teacher: &forced }, rp.washout)?;
    let targets = teacher.columns(rp.washout, teach - rp.washout).into_owned();
    let w = match readout {
        Some(w) => w.clone(),
        None => {
            let mut w = train_readout(&harvest.states, &targets, cfg.reservoir.ridge)?;
            w.trained_on.seed = Some(seed);
            w
        }
    };
    let fit: Vec<f64> = w.apply_matrix(&harvest.states)?.row(0).iter().copied().collect();

    // Free run.
    let reference = &signal[teach..];
    let generated = runner.clone().free_run(free, &w)?;
    let output: Vec<f64> = generated.outputs.row(0).iter().copied().collect();
    let truth = &reference[..free];

    let horizon = divergence_horizon(truth, &output, cfg.divergence_epsilon, cfg.divergence_hold);
    let windows = truth
        .chunks(cfg.window)
        .zip(output.chunks(cfg.window))
        .filter(|(t, _)| t.len() == cfg.window)
        .map(|(t, o)| series_error(t, o))
        .collect::<Result<Vec<_>>>()?;

    let inject_at = horizon.map_or(free, |h| (h + cfg.divergence_hold).min(free));
    let injection = corrective_injection(&runner, &w, reference, inject_at, cfg.injection_len, cfg.window)?;

    let metrics = MetricReport {
        nrmse: series_error(&truth[..cfg.eval_len], &output[..cfg.eval_len])?,
        sign_agreement: None,
        recovery_rate: None,
        divergence_horizon: horizon,
    };
    let mut report = TaskReport::new(TaskKind::Autoencoder, seed, metrics);
    report.windows = windows;
    report.extra.insert("train_nrmse".into(), series_error(&signal[rp.washout..teach], &fit)?);
    report.extra.insert("injection_at".into(), injection.at as f64);
    report.extra.insert("injection_before".into(), injection.before);
    report.extra.insert("injection_after".into(), injection.after);

    let t: Vec<f64> = (rp.washout..teach + free).map(|k| k as f64).collect();
    let phase: Vec<f64> = (rp.washout..teach + free).map(|k| if k < teach { 0.0 } else { 1.0 }).collect();
    let mut out = fit;
    out.extend_from_slice(&output);
    report.traces.push(
        Trace::new("autoencoder")
            .with("t", t)
            .with("phase", phase)
            .with("target", signal[rp.washout..teach + free].to_vec())
            .with("output", out),
    );
    Ok((report, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_is_held() {
        let cfg = AutoencoderConfig {
            signal: SignalKind::Constant,
            amplitude: 0.5,
            teach_len: 600,
            free_len: 500,
            eval_len: 500,
            ..Default::default()
        };
        let mut cfg = cfg;
        cfg.reservoir.dynamics.noise_gain = 0.0;
        let r = task_autoencoder(&cfg, 1).unwrap();
        assert!(r.metrics.nrmse <= 0.05, "{r:?}");
    }

    #[test]
    fn rejects_missing_feedback() {
        let mut cfg = AutoencoderConfig::default();
        cfg.reservoir.topology.fb_scale = 0.0;
        assert!(task_autoencoder(&cfg, 1).is_err());
    }

    #[test]
    fn rejects_bad_lengths() {
        let cfg = AutoencoderConfig { eval_len: 700, ..Default::default() };
        assert!(task_autoencoder(&cfg, 1).is_err());
        let cfg = AutoencoderConfig { teach_len: 40, ..Default::default() };
        assert!(task_autoencoder(&cfg, 1).is_err());
    }

    #[test]
    fn constant_error_falls_back_to_level() {
        assert!((series_error(&[2.0, 2.0], &[2.2, 1.8]).unwrap() - 0.1).abs() < 1e-12);
    }
}
