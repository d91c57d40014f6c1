use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::{Error, Result};

/// Nonlinearity used by every neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Backend {
    /// `activation_gain · tanh(z)`.
    Ideal,
    /// `(2·activation_gain / v_dd) · asn_response(voltage_scale · z)`; the
    /// device provides the noise, so `noise_gain` is ignored.
    Asn {
        device: DeviceParams,
        /// Volts per unit of preactivation.
        voltage_scale: f64,
    },
}

impl Backend {
    /// ASN backend whose mean slope matches the ideal `tanh`.
    pub fn asn_matched(device: DeviceParams) -> Self {
        Backend::Asn {
            voltage_scale: 1.0 / device.slope_beta,
            device,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirParams {
    /// Output gain of the nonlinearity.
    pub activation_gain: f64,
    /// Scale of the per-step Gaussian drive.
    pub noise_gain: f64,
    /// Per-step leak, in [0, 1].
    pub decay: f64,
    /// Initial steps dropped before states are harvested.
    pub washout: usize,
    pub backend: Backend,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        Self {
            activation_gain: 1.0,
            noise_gain: 0.05,
            decay: 0.3,
            washout: 50,
            backend: Backend::Ideal,
        }
    }
}

impl ReservoirParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.activation_gain > 0.0 && self.activation_gain.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "activation_gain must be > 0, got {}",
                self.activation_gain
            )));
        }
        if !(self.noise_gain >= 0.0 && self.noise_gain.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "noise_gain must be >= 0, got {}",
                self.noise_gain
            )));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::InvalidParam(format!("decay must lie in [0, 1], got {}", self.decay)));
        }
        if let Backend::Asn { device, voltage_scale } = &self.backend {
            device.validate()?;
            if !(*voltage_scale > 0.0 && voltage_scale.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "voltage_scale must be > 0, got {voltage_scale}"
                )));
            }
        }
        Ok(())
    }

    /// Copy with every stochastic term switched off.
    pub fn noiseless(&self) -> Self {
        let backend = match self.backend {
            Backend::Ideal => Backend::Ideal,
            Backend::Asn { device, voltage_scale } => Backend::Asn {
                device: DeviceParams { noise_amp_alpha: 0.0, ..device },
                voltage_scale,
            },
        };
        Self {
            noise_gain: 0.0,
            backend,
            ..self.clone()
        }
    }
}
