//! Glyph video through a noisy nonlinear channel, cleaned up by a reservoir.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Glyph, ReservoirConfig, TaskKind, TaskReport, Trace};
use crate::metrics::{pixel_accuracy, recovery_rate, MetricReport};
use crate::readout::{train_readout, ReadoutWeights};
use crate::reservoir::{run, RunMode, Topology, TopologySpec};
use crate::seed::{component_rng, derive_seed, rng_from};
use crate::{Error, Result};

/// Channel model: `tanh(k·(g_t·frame + b_t)) + ε`, with `g_t`, `b_t`
/// redrawn every frame and `ε` drawn per pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistortionParams {
    pub gain_jitter: f64,
    pub offset_jitter: f64,
    pub pixel_noise: f64,
    pub nonlinearity_gain: f64,
}

impl Default for DistortionParams {
    fn default() -> Self {
        Self {
            gain_jitter: 0.3,
            offset_jitter: 0.3,
            pixel_noise: 0.3,
            nonlinearity_gain: 2.0,
        }
    }
}

impl DistortionParams {
    /// Deterministic channel: no jitter and no pixel noise, same nonlinearity.
    pub fn clean() -> Self {
        Self {
            gain_jitter: 0.0,
            offset_jitter: 0.0,
            pixel_noise: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gain_jitter", self.gain_jitter),
            ("offset_jitter", self.offset_jitter),
            ("pixel_noise", self.pixel_noise),
            ("nonlinearity_gain", self.nonlinearity_gain),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Distorts frame `t`. The result depends only on `(frame, t, d, seed)`.
pub fn distort_frame(frame: &[f64], t: usize, d: &DistortionParams, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(derive_seed(seed, &format!("distort-{t}")));
    let g_noise: f64 = rng.sample(StandardNormal);
    let b_noise: f64 = rng.sample(StandardNormal);
    let gain = 1.0 + d.gain_jitter * g_noise;
    let offset = d.offset_jitter * b_noise;
    frame
        .iter()
        .map(|&p| {
            let eps: f64 = rng.sample(StandardNormal);
            (d.nonlinearity_gain * (gain * p + offset)).tanh() + d.pixel_noise * eps
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlyphVideoSpec {
    /// Names of built-in glyphs.
    pub glyphs: Vec<String>,
    pub frames_per_glyph: usize,
    pub total_frames: usize,
    pub distortion: DistortionParams,
}

impl Default for GlyphVideoSpec {
    fn default() -> Self {
        Self {
            glyphs: vec!["I".into(), "7".into()],
            frames_per_glyph: 8,
            total_frames: 640,
            distortion: DistortionParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphVideo {
    pub height: usize,
    pub width: usize,
    /// Index into the glyph list, per frame.
    pub labels: Vec<usize>,
    pub clean: Vec<Vec<f64>>,
    pub distorted: Vec<Vec<f64>>,
}

/// Builds the clean and distorted frame sequences. Each block of
/// `frames_per_glyph` frames shows one glyph drawn uniformly from the set.
pub fn generate_video(spec: &GlyphVideoSpec, seed: u64) -> Result<GlyphVideo> {
    let glyphs: Vec<Glyph> = spec.glyphs.iter().map(|g| Glyph::builtin(g)).collect::<Result<_>>()?;
    generate_video_from(&glyphs, spec, seed)
}

pub(crate) fn generate_video_from(glyphs: &[Glyph], spec: &GlyphVideoSpec, seed: u64) -> Result<GlyphVideo> {
    spec.distortion.validate()?;
    if glyphs.is_empty() {
        return Err(Error::InvalidParam("video needs at least one glyph".into()));
    }
    if spec.frames_per_glyph == 0 {
        return Err(Error::InvalidParam("frames_per_glyph must be >= 1".into()));
    }
    let (height, width) = (glyphs[0].height, glyphs[0].width);
    if glyphs.iter().any(|g| (g.height, g.width) != (height, width)) {
        return Err(Error::InvalidParam("all glyphs must share one size".into()));
    }

    let mut order = component_rng(seed, "glyph-order");
    let distortion_seed = derive_seed(seed, "distortion");
    let mut labels = Vec::with_capacity(spec.total_frames);
    let mut clean = Vec::with_capacity(spec.total_frames);
    let mut distorted = Vec::with_capacity(spec.total_frames);
    let mut current = 0;
    for t in 0..spec.total_frames {
        if t % spec.frames_per_glyph == 0 {
            current = order.random_range(0..glyphs.len());
        }
        let frame = &glyphs[current].pixels;
        labels.push(current);
        distorted.push(distort_frame(frame, t, &spec.distortion, distortion_seed));
        clean.push(frame.clone());
    }
    Ok(GlyphVideo {
        height,
        width,
        labels,
        clean,
        distorted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VideoConfig {
    pub reservoir: ReservoirConfig,
    pub video: GlyphVideoSpec,
    /// Share of post-washout frames used for training.
    pub train_fraction: f64,
    /// Pixel agreement a frame needs to count as recovered.
    pub pixel_thresh: f64,
}

impl Default for VideoConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig {
                topology: TopologySpec {
                    n: 200,
                    inputs: 64,
                    outputs: 64,
                    ..Default::default()
                },
                ..Default::default()
            },
            video: GlyphVideoSpec::default(),
            train_fraction: 0.6,
            pixel_thresh: 0.95,
        }
    }
}

/// Trains the readout to map distorted frames back to clean ones and scores
/// frame recovery on the held-out tail of the video.
pub fn task_video_filter(cfg: &VideoConfig, seed: u64) -> Result<TaskReport> {
    let topo = cfg.reservoir.build(seed)?;
    Ok(video_filter_on(&topo, cfg, seed, None)?.0)
}

/// Video-filter pipeline on a given topology. A supplied readout is scored
/// as is; otherwise one is fitted on the training frames.
pub fn video_filter_on(
    topo: &Topology,
    cfg: &VideoConfig,
    seed: u64,
    readout: Option<&ReadoutWeights>,
) -> Result<(TaskReport, ReadoutWeights)> {
    let video = generate_video(&cfg.video, derive_seed(seed, "video"))?;
    let pixels = video.height * video.width;
    if topo.inputs() != pixels || topo.outputs() != pixels {
        return Err(Error::dim(
            "video reservoir (inputs, outputs)",
            format!("({pixels}, {pixels})"),
            format!("({}, {})", topo.inputs(), topo.outputs()),
        ));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::InvalidParam("train_fraction must lie in (0, 1)".into()));
    }

    let rp = &cfg.reservoir.dynamics;
    let total = video.distorted.len();
    let kept = total.saturating_sub(rp.washout);
    let train_len = (kept as f64 * cfg.train_fraction).round() as usize;
    if train_len == 0 || train_len >= kept {
        return Err(Error::InvalidParam(format!(
            "video of {total} frames leaves no train/test split after washout {}",
            rp.washout
        )));
    }

    let inputs = DMatrix::from_fn(pixels, total, |r, c| video.distorted[c][r]);
    let harvest = run(topo, rp, &inputs, RunMode::NoFeedback, ReservoirConfig::noise_seed(seed))?;
    let targets = DMatrix::from_fn(pixels, kept, |r, c| video.clean[c + rp.washout][r]);

    let w = match readout {
        Some(w) => w.clone(),
        None => {
            let train_x = harvest.states.columns(0, train_len).into_owned();
            let train_y = targets.columns(0, train_len).into_owned();
            let mut w = train_readout(&train_x, &train_y, cfg.reservoir.ridge)?;
            w.trained_on.seed = Some(seed);
            w
        }
    };
    let recovered = w.apply_matrix(&harvest.states)?;

    let frames: Vec<Vec<f64>> = (0..kept).map(|c| recovered.column(c).iter().copied().collect()).collect();
    let truth = &video.clean[rp.washout..];
    let labels = &video.labels[rp.washout..];
    let accuracy: Vec<f64> = truth
        .iter()
        .zip(&frames)
        .map(|(t, r)| pixel_accuracy(t, r))
        .collect::<Result<_>>()?;

    let test_rate = recovery_rate(&truth[train_len..], &frames[train_len..], cfg.pixel_thresh)?;
    let train_rate = recovery_rate(&truth[..train_len], &frames[..train_len], cfg.pixel_thresh)?;
    let lags = transition_lags(&labels[train_len..], &accuracy[train_len..], cfg.pixel_thresh, cfg.video.frames_per_glyph);

    let mse = truth[train_len..]
        .iter()
        .zip(&frames[train_len..])
        .flat_map(|(t, r)| t.iter().zip(r).map(|(a, b)| (a - b).powi(2)))
        .sum::<f64>()
        / ((kept - train_len) * pixels) as f64;

    let metrics = MetricReport {
        nrmse: pixel_nrmse(&truth[train_len..], mse),
        sign_agreement: None,
        recovery_rate: Some(test_rate),
        divergence_horizon: None,
    };
    let mut report = TaskReport::new(TaskKind::Video, seed, metrics);
    report.extra.insert("train_recovery_rate".into(), train_rate);
    report.extra.insert("test_frames".into(), (kept - train_len) as f64);
    report.extra.insert("glyph_changes".into(), lags.len() as f64);
    if !lags.is_empty() {
        let mean = lags.iter().sum::<usize>() as f64 / lags.len() as f64;
        let worst = *lags.iter().max().unwrap_or(&0) as f64;
        report.extra.insert("transition_lag_mean".into(), mean);
        report.extra.insert("transition_lag_max".into(), worst);
    }

    let t: Vec<f64> = (rp.washout..total).map(|k| k as f64).collect();
    let split: Vec<f64> = (0..kept).map(|k| if k < train_len { 0.0 } else { 1.0 }).collect();
    report.traces.push(
        Trace::new("video_accuracy")
            .with("t", t.clone())
            .with("glyph", labels.iter().map(|&l| l as f64).collect())
            .with("test", split)
            .with("pixel_accuracy", accuracy),
    );
    let mut frames_trace = Trace::new("video_frames").with("t", t);
    for p in 0..pixels {
        frames_trace = frames_trace.with(format!("p{p}"), frames.iter().map(|f| f[p]).collect());
    }
    report.traces.push(frames_trace);
    Ok((report, w))
}

fn pixel_nrmse(truth: &[Vec<f64>], mse: f64) -> f64 {
    let count = truth.iter().map(Vec::len).sum::<usize>() as f64;
    let mean = truth.iter().flatten().sum::<f64>() / count;
    let var = truth.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    if var > 0.0 {
        (mse / var).sqrt()
    } else {
        mse.sqrt()
    }
}

/// Frames needed after each glyph change until pixel accuracy is back above
/// `thresh`; capped at `cap`.
fn transition_lags(labels: &[usize], accuracy: &[f64], thresh: f64, cap: usize) -> Vec<usize> {
    (1..labels.len())
        .filter(|&k| labels[k] != labels[k - 1])
        .filter_map(|k| {
            let window = &accuracy[k..(k + cap).min(accuracy.len())];
            if window.len() < cap {
                return None;
            }
            Some(window.iter().position(|&a| a >= thresh).unwrap_or(cap))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_nonlinearity_blanks_frame() {
        let d = DistortionParams {
            gain_jitter: 0.0,
            offset_jitter: 0.0,
            pixel_noise: 0.0,
            nonlinearity_gain: 1e-12,
        };
        let out = distort_frame(&[1.0, 0.0, 1.0], 3, &d, 1);
        assert!(out.iter().all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn clean_channel_on_lit_pixel() {
        let out = distort_frame(&[1.0, 0.0], 0, &DistortionParams::clean(), 1);
        assert!((out[0] - 0.96403).abs() < 1e-5);
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn distortion_is_deterministic_per_frame_and_seed() {
        let d = DistortionParams::default();
        let frame = Glyph::builtin("7").unwrap().pixels;
        assert_eq!(distort_frame(&frame, 5, &d, 2), distort_frame(&frame, 5, &d, 2));
        assert_ne!(distort_frame(&frame, 5, &d, 2), distort_frame(&frame, 6, &d, 2));
    }

    #[test]
    fn video_blocks_hold_one_glyph() {
        let spec = GlyphVideoSpec { total_frames: 64, ..Default::default() };
        let v = generate_video(&spec, 1).unwrap();
        for block in v.labels.chunks(8) {
            assert!(block.iter().all(|&l| l == block[0]));
        }
        assert_eq!(v.distorted.len(), 64);
        assert_eq!(v.clean[0].len(), 64);
    }

    #[test]
    fn lag_counts_frames_until_recovery() {
        let labels = [0, 0, 1, 1, 1, 0, 0, 0];
        let acc = [1.0, 1.0, 0.5, 0.6, 1.0, 0.2, 1.0, 1.0];
        assert_eq!(transition_lags(&labels, &acc, 0.95, 3), vec![2, 1]);
    }

    #[test]
    fn mismatched_reservoir_rejected() {
        let mut cfg = VideoConfig::default();
        cfg.reservoir.topology.inputs = 10;
        cfg.video.total_frames = 120;
        assert!(matches!(task_video_filter(&cfg, 1), Err(Error::Dimension { .. })));
    }
}
