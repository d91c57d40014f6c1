//! Scalar test signals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mackey-Glass steps discarded before the series is kept.
pub const MACKEY_GLASS_TRANSIENT: usize = 500;
/// Constant history the Mackey-Glass integration starts from.
pub const MACKEY_GLASS_HISTORY: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalKind {
    /// `+amplitude` for the first half of each period, `-amplitude` after.
    Square { period: usize },
    Sine { frequency: f64 },
    /// Starts at `-amplitude`, peaks at half period.
    Triangle { period: usize },
    /// `sin(2π·f1·t)·sin(2π·f2·t)`.
    DoubleSinusoid { f1: f64, f2: f64 },
    /// `dx/dt = a·x(t−τ)/(1 + x(t−τ)^p) − b·x(t)`, Euler with unit step.
    MackeyGlass { a: f64, b: f64, p: f64, tau_mg: usize },
    Constant,
}

impl SignalKind {
    pub fn mackey_glass_default() -> Self {
        SignalKind::MackeyGlass {
            a: 0.2,
            b: 0.1,
            p: 10.0,
            tau_mg: 17,
        }
    }

    pub fn double_sinusoid_default() -> Self {
        SignalKind::DoubleSinusoid {
            f1: 0.0211,
            f2: 0.0034,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    pub amplitude: f64,
    pub length: usize,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, amplitude: f64, length: usize) -> Self {
        Self {
            kind,
            amplitude,
            length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidParam("signal length must be > 0".into()));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParam("signal amplitude must be finite".into()));
        }
        let freq_ok = |f: f64| f > 0.0 && f < 0.5;
        match self.kind {
            SignalKind::Square { period } | SignalKind::Triangle { period } if period < 2 => {
                Err(Error::InvalidParam(format!("period must be >= 2, got {period}")))
            }
            SignalKind::Sine { frequency } if !freq_ok(frequency) => Err(Error::InvalidParam(
                format!("frequency must lie in (0, 0.5), got {frequency}"),
            )),
            SignalKind::DoubleSinusoid { f1, f2 } if !(freq_ok(f1) && freq_ok(f2)) => Err(
                Error::InvalidParam(format!("frequencies must lie in (0, 0.5), got {f1}, {f2}")),
            ),
            SignalKind::MackeyGlass { a, b, p, tau_mg } => {
                if tau_mg < 1 {
                    Err(Error::InvalidParam("mackey-glass tau must be >= 1".into()))
                } else if ![a, b, p].iter().all(|v| v.is_finite()) {
                    Err(Error::InvalidParam("mackey-glass coefficients must be finite".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

pub fn gen_signal(spec: &SignalSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let amp = spec.amplitude;
    let len = spec.length;
    let series = match spec.kind {
        SignalKind::Square { period } => (0..len)
            .map(|t| if (t % period) < period.div_ceil(2) { amp } else { -amp })
            .collect(),
        SignalKind::Sine { frequency } => (0..len)
            .map(|t| amp * (2.0 * PI * frequency * t as f64).sin())
            .collect(),
        SignalKind::Triangle { period } => (0..len)
            .map(|t| {
                let phase = (t % period) as f64 / period as f64;
                amp * (1.0 - 4.0 * (phase - 0.5).abs())
            })
            .collect(),
        SignalKind::DoubleSinusoid { f1, f2 } => (0..len)
            .map(|t| {
                let t = t as f64;
                amp * (2.0 * PI * f1 * t).sin() * (2.0 * PI * f2 * t).sin()
            })
            .collect(),
        SignalKind::MackeyGlass { a, b, p, tau_mg } => {
            let raw = mackey_glass_raw(a, b, p, tau_mg, len)?;
            normalize(&raw, amp)
        }
        SignalKind::Constant => vec![amp; len],
    };
    Ok(series)
}

fn mackey_glass_raw(a: f64, b: f64, p: f64, tau: usize, len: usize) -> Result<Vec<f64>> {
    let total = MACKEY_GLASS_TRANSIENT + len;
    // x[k] for k in [-tau, total); index shifted by tau.
    let mut x = vec![MACKEY_GLASS_HISTORY; tau + 1];
    x.reserve(total);
    for k in 0..total {
        let now = x[tau + k];
        let lagged = x[k];
        let next = now + a * lagged / (1.0 + lagged.powf(p)) - b * now;
        if !next.is_finite() {
            return Err(Error::NonFinite("mackey-glass integration"));
        }
        x.push(next);
    }
    Ok(x[tau + 1 + MACKEY_GLASS_TRANSIENT..].to_vec())
}

/// Affine map of `xs` onto `[-amp, amp]`.
fn normalize(xs: &[f64], amp: f64) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span <= 0.0 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|v| amp * (2.0 * (v - lo) / span - 1.0)).collect()
}
